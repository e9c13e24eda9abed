#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "mhdlab/aligned.hpp"

namespace mhdlab {

using Complex = std::complex<double>;

/// Outer edge of the coordinate window, as a fraction of the box half-width
/// pi*L. Beyond this radius the windowed coordinates vanish identically.
inline constexpr double kWindowOuterFraction = 0.95;

struct GridSpec {
  int n = 128;                          ///< points per side
  double box_half_length = 3.0;         ///< L; the box is [-pi L, pi L)^2
  double dealias_fraction = 2.0 / 3.0;  ///< radial mask radius as a fraction of n/2
  double window_core_fraction = 0.8;    ///< windowed coordinates are exact for r <= this * pi L

  bool operator==(const GridSpec&) const = default;
};

class Grid;
using GridPtr = std::shared_ptr<const Grid>;

/// Uniform periodic grid on [-pi L, pi L)^2 together with its spectral lattice,
/// dealias mask, coordinate window and FFT plans.
///
/// Physical samples are stored row-major with x1 as the slow index. Index i
/// along an axis sits at coordinate ((i + n/2) mod n - n/2) * dx, so the origin
/// is at index 0 and the reflection x -> -x is i -> (n - i) mod n. With that
/// ordering the DFT gives the coefficients of exp(i k.x) directly, without
/// phase factors.
///
/// Spectral arrays use the real-to-complex half lattice: index
/// i1 * (n/2 + 1) + j2 holds the mode (m1, m2) with m1 = signed(i1), m2 = j2 >= 0,
/// and wavenumber k = m / L.
class Grid {
 public:
  static GridPtr make(const GridSpec& spec);

  ~Grid();
  Grid(const Grid&) = delete;
  Grid& operator=(const Grid&) = delete;

  const GridSpec& spec() const noexcept { return spec_; }
  int n() const noexcept { return spec_.n; }
  int nk() const noexcept { return spec_.n / 2 + 1; }
  std::size_t physical_size() const noexcept { return static_cast<std::size_t>(n()) * n(); }
  std::size_t spectral_size() const noexcept { return static_cast<std::size_t>(n()) * nk(); }

  double box_half_length() const noexcept { return spec_.box_half_length; }
  double dx() const noexcept { return dx_; }
  double area() const noexcept { return area_; }
  double cell_area() const noexcept { return dx_ * dx_; }

  double coordinate(int i) const noexcept;
  int signed_mode(int i1) const noexcept { return i1 <= n() / 2 ? i1 : i1 - n(); }

  double k1(std::size_t idx) const noexcept { return k1_[idx]; }
  double k2(std::size_t idx) const noexcept { return k2_[idx]; }
  /// Derivative multipliers: equal to k except that Nyquist components are zeroed.
  double k1_deriv(std::size_t idx) const noexcept { return k1d_[idx]; }
  double k2_deriv(std::size_t idx) const noexcept { return k2d_[idx]; }
  double k_squared(std::size_t idx) const noexcept { return ksq_[idx]; }
  bool kept(std::size_t idx) const noexcept { return mask_[idx] != 0; }
  /// Multiplicity of a half-lattice entry in the full lattice (1 or 2).
  double multiplicity(std::size_t idx) const noexcept { return mult_[idx]; }
  /// Largest |k| retained by the dealias mask (strict upper bound).
  double dealias_radius() const noexcept { return kcut_; }

  std::span<const double> k_squared() const noexcept { return ksq_; }
  std::span<const double> multiplicity() const noexcept { return mult_; }

  double core_radius() const noexcept;
  double outer_radius() const noexcept;
  /// Radial taper chi(r): 1 on the core, 0 beyond the outer radius, C^4 blend between.
  double window(double r) const noexcept;
  /// int_0^r chi(s) s ds; minus this is the stream function of the windowed background.
  double window_moment(double r) const noexcept;
  /// Windowed rotation field V = chi(r) (-x2, x1), so that d_theta f = V . grad f.
  std::span<const double> rotation_x1() const noexcept { return rot1_; }
  std::span<const double> rotation_x2() const noexcept { return rot2_; }
  /// max over the grid of |w| = chi(r) r.
  double max_window_speed() const noexcept { return max_w_; }
  /// 1 where the grid point lies inside the core disc, else 0.
  std::span<const unsigned char> core_mask() const noexcept { return core_; }

  bool compatible(const Grid& other) const noexcept { return spec_ == other.spec_; }
  /// Same box and window with `factor` times as many points per side.
  GridPtr refined(int factor) const;

  /// Unnormalized r2c transform; `in` is preserved.
  void execute_forward(const double* in, Complex* out) const;
  /// Unnormalized c2r transform; `in` is overwritten.
  void execute_inverse(Complex* in, double* out) const;

 private:
  explicit Grid(const GridSpec& spec);

  GridSpec spec_;
  double dx_ = 0.0;
  double area_ = 0.0;
  double kcut_ = 0.0;
  double max_w_ = 0.0;
  std::vector<double> k1_, k2_, k1d_, k2d_, ksq_, mult_;
  std::vector<unsigned char> mask_;
  std::vector<double> rot1_, rot2_;
  std::vector<unsigned char> core_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

void validate(const GridSpec& spec);

}  // namespace mhdlab
