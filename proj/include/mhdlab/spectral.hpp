#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "mhdlab/aligned.hpp"
#include "mhdlab/grid.hpp"

namespace mhdlab {

/// Samples of a real field at the grid points (see Grid for the ordering).
class PhysicalField {
 public:
  PhysicalField() = default;
  explicit PhysicalField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  double& operator[](std::size_t p) { return values_[p]; }
  double operator[](std::size_t p) const { return values_[p]; }
  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }

  /// Fill from f(x1, x2) evaluated at every grid point.
  template <typename Fn>
  static PhysicalField sample(GridPtr grid, Fn&& f) {
    PhysicalField out(grid);
    const int n = grid->n();
    for (int i1 = 0; i1 < n; ++i1) {
      const double x1 = grid->coordinate(i1);
      for (int i2 = 0; i2 < n; ++i2) {
        out.values_[static_cast<std::size_t>(i1) * n + i2] = f(x1, grid->coordinate(i2));
      }
    }
    return out;
  }

 private:
  GridPtr grid_;
  AlignedVector<double> values_;
};

/// Real scalar field held as Fourier coefficients c_k of f(x) = sum_k c_k exp(i k.x)
/// on the half lattice. Coefficients of real fields are conjugate-symmetric.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(GridPtr grid);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  bool empty() const noexcept { return grid_ == nullptr; }

  std::span<Complex> coeffs() noexcept { return coeffs_; }
  std::span<const Complex> coeffs() const noexcept { return coeffs_; }
  Complex& operator[](std::size_t idx) { return coeffs_[idx]; }
  const Complex& operator[](std::size_t idx) const { return coeffs_[idx]; }

  ScalarField& operator+=(const ScalarField& o);
  ScalarField& operator-=(const ScalarField& o);
  ScalarField& operator*=(double a);
  /// this += a * o
  ScalarField& axpy(double a, const ScalarField& o);

  friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
  friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
  friend ScalarField operator*(double s, ScalarField a) { return a *= s; }
  friend ScalarField operator-(ScalarField a) { return a *= -1.0; }

 private:
  GridPtr grid_;
  AlignedVector<Complex> coeffs_;
};

/// Reflection symmetry classes of the initial data.
///
/// velocity_like: component 1 odd in x1 and even in x2, component 2 even in x1
/// and odd in x2. magnetic_like: the mirrored assignment (component 1 even/odd,
/// component 2 odd/even).
enum class ParityClass { velocity_like, magnetic_like };

std::string_view to_string(ParityClass c);
ParityClass parity_class_from_string(std::string_view s);
/// The class obtained by applying d_theta (or any single reflection-odd operator).
ParityClass opposite(ParityClass c);

struct VectorField {
  std::array<ScalarField, 2> components;
  std::optional<ParityClass> parity;
  bool divergence_free = false;

  VectorField() = default;
  explicit VectorField(GridPtr grid);
  VectorField(ScalarField c1, ScalarField c2) : components{std::move(c1), std::move(c2)} {}

  const Grid& grid() const { return components[0].grid(); }
  const GridPtr& grid_ptr() const { return components[0].grid_ptr(); }
  ScalarField& operator[](int i) { return components[i]; }
  const ScalarField& operator[](int i) const { return components[i]; }

  VectorField& operator+=(const VectorField& o);
  VectorField& operator-=(const VectorField& o);
  VectorField& operator*=(double a);
  VectorField& axpy(double a, const VectorField& o);

  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
};

// ---------------------------------------------------------------------------
// Transforms

ScalarField forward_transform(const PhysicalField& f);
PhysicalField inverse_transform(const ScalarField& f);

// ---------------------------------------------------------------------------
// Multipliers

enum class ZeroModePolicy { reject, zero };

/// Lambda^s: multiplies mode k by |k|^s. For s > 0 the zero mode maps to zero;
/// for s < 0 a non-vanishing zero mode is rejected (or dropped, per policy).
ScalarField fractional_multiplier(const ScalarField& f, double s,
                                  ZeroModePolicy policy = ZeroModePolicy::reject);

/// d/dx_axis (axis 0 -> x1, 1 -> x2).
ScalarField derivative(const ScalarField& f, int axis);
ScalarField laplacian(const ScalarField& f);
/// (I - alpha Delta)^{-1} f.
ScalarField helmholtz_solve(const ScalarField& f, double alpha);
/// Zero every mode outside the radial dealias mask.
ScalarField dealias(const ScalarField& f);
void dealias_in_place(ScalarField& f);

/// Coefficients on `fine` (same box, more points) with the spectrum zero-padded.
ScalarField prolong(const ScalarField& f, const GridPtr& fine);
/// Pseudo-spectral product, dealiased. Exact for dealiased inputs.
ScalarField product(const ScalarField& f, const ScalarField& g);

// ---------------------------------------------------------------------------
// Vector operations

/// Orthogonal projection onto divergence-free fields; keeps the zero mode.
VectorField leray_project(const VectorField& v);
ScalarField divergence(const VectorField& v);
/// d1 v2 - d2 v1
ScalarField curl(const VectorField& v);
VectorField dealias(const VectorField& v);
VectorField laplacian(const VectorField& v);

// ---------------------------------------------------------------------------
// Norms and inner products (box-normalized: s = 0 gives the L2 norm over the box)

double l2_norm(const ScalarField& f);
double l2_norm(const VectorField& v);
double inner(const ScalarField& f, const ScalarField& g);
double inner(const VectorField& f, const VectorField& g);
/// |divergence| / |grad v| in L2, 0 for a constant field.
double relative_divergence(const VectorField& v);
/// Largest |c_k| over all modes.
double max_coefficient(const ScalarField& f);

void require_same_grid(const Grid& a, const Grid& b, const char* where);

}  // namespace mhdlab
