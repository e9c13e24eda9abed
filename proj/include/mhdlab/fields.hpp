#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mhdlab/spectral.hpp"

namespace mhdlab {

/// u = grad^perp(phi) = (-d2 phi, d1 phi). The result is flagged divergence-free
/// and carries `tag` as its parity (the caller knows the stream's symmetry).
VectorField from_stream(const ScalarField& phi, std::optional<ParityClass> tag = std::nullopt);

/// Average over the reflection group {id, R1, R2, R1R2} with the signs of the
/// requested class. Orthogonal projection; tags the result with `cls`.
VectorField parity_project(const VectorField& v, ParityClass cls);
/// Scalar version: p1, p2 = +1 (even) or -1 (odd) in x1 and x2.
ScalarField parity_project(const ScalarField& f, int p1, int p2);
/// |v - P v| / |v| in L2; 0 for the zero field.
double parity_error(const VectorField& v, ParityClass cls);

/// Share of the L2 mass of f lying outside the core disc (0 for the zero field).
double support_leakage(const ScalarField& f);
double support_leakage(const VectorField& v);

struct ThetaCheck {
  double soft_threshold = 1e-10;  ///< above: result flagged approximate
  double hard_threshold = 1e-4;   ///< above: TruncationError
};

template <typename T>
struct Flagged {
  T value;
  bool approximate = false;
  double leakage = 0.0;
};

/// d_theta f = x1 d2 f - x2 d1 f with windowed coordinates, dealiased.
/// Throws TruncationError when the input leaks past the hard threshold.
ScalarField d_theta(const ScalarField& f, const ThetaCheck& check = {});
VectorField d_theta(const VectorField& v, const ThetaCheck& check = {});
Flagged<ScalarField> d_theta_flagged(const ScalarField& f, const ThetaCheck& check = {});
Flagged<VectorField> d_theta_flagged(const VectorField& v, const ThetaCheck& check = {});
/// No support check; for hot paths that monitor leakage themselves.
ScalarField d_theta_unchecked(const ScalarField& f);
VectorField d_theta_unchecked(const VectorField& v);

// ---------------------------------------------------------------------------
// Random data

enum class SpectralLaw { gaussian, power };

/// Spectral weight S(|k|) of the carrier modes and the physical envelope that
/// confines the data to the core.
struct Envelope {
  SpectralLaw law = SpectralLaw::gaussian;
  double k0 = 1.0;               ///< gaussian: S = exp(-(|k|/k0)^2); power: S = (1 + |k|/k0)^-exponent
  double exponent = 6.0;
  double radius = 1.6;           ///< physical Gaussian envelope exp(-(r/radius)^2)
  double carrier_spacing = 0.25; ///< carriers sit on the lattice carrier_spacing * Z^2
  double carrier_cutoff = 4.0;   ///< carriers with |k| > cutoff * k0 are omitted
  /// Subtract the circle average of the stream function. In the magnetic class this
  /// removes the azimuthal fields g(r) e_theta, which are steady under the linear flow.
  bool remove_radial_mode = false;
  bool operator==(const Envelope&) const = default;
};

/// Which norm the amplitude refers to: |v|_{H^-sigma} + |v|_{H^{2s+6}}.
struct SmallnessNorm {
  int s = 2;
  double sigma = 3.0 / 23.0;
  double evaluate(const VectorField& v) const;
};

/// Divergence-free field in the class, tapered to the core, deterministic per seed,
/// scaled so that SmallnessNorm equals `amplitude`.
VectorField random_symmetric_field(GridPtr grid, std::uint64_t seed, const Envelope& env, ParityClass cls,
                                   double amplitude, const SmallnessNorm& norm = {});

/// Real scalar with no symmetry, tapered to the core, dealiased, unit L2 norm.
ScalarField random_smooth_scalar(GridPtr grid, std::uint64_t seed, const Envelope& env);

// ---------------------------------------------------------------------------
// Angular averages

/// Evaluates (1/2pi) of the integral over a circle of radius r, by exact
/// trigonometric interpolation of the Fourier series at 256 circle points.
class CircleAverager {
 public:
  CircleAverager(GridPtr grid, std::vector<double> radii, int points = 256);
  const std::vector<double>& radii() const noexcept { return radii_; }
  std::vector<double> averages(const ScalarField& f) const;

 private:
  GridPtr grid_;
  std::vector<double> radii_;
  std::vector<std::vector<double>> weights_;  // real part of the circle mean of exp(ik.x), per radius
};

/// For each radius the max over components of the angular mean.
std::vector<double> zero_angular_mode(const VectorField& v, const std::vector<double>& radii);
/// `count` radii evenly spread strictly inside the core: r_core * i / (count + 1).
std::vector<double> core_radii(const Grid& grid, int count = 8);

// ---------------------------------------------------------------------------
// Background

/// Windowed equilibrium B0 = chi(r) (x2, -x1).
struct BackgroundField {
  GridPtr grid;
  VectorField field;

  explicit BackgroundField(GridPtr grid);
};

VectorField full_from_perturbation(const VectorField& b, const BackgroundField& bg);
VectorField perturbation_from_full(const VectorField& B, const BackgroundField& bg);

/// Max |v| over the grid points (both components).
double max_abs(const VectorField& v);
double max_abs(const ScalarField& f);

}  // namespace mhdlab
