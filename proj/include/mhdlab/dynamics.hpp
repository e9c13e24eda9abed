#pragma once

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mhdlab/fields.hpp"

namespace mhdlab {

struct State {
  VectorField u;  ///< velocity perturbation, velocity_like, divergence-free
  VectorField b;  ///< magnetic perturbation, magnetic_like, divergence-free
  double t = 0.0;

  State() = default;
  State(VectorField u_, VectorField b_, double t_ = 0.0);
  /// Zero state on a grid, with the standard class tags.
  static State zero(GridPtr grid);
  const Grid& grid() const { return u.grid(); }
  const GridPtr& grid_ptr() const { return u.grid_ptr(); }
};

/// Checks grids, tags and (to 1e-10) the divergence-free and parity assertions.
void validate(const State& s);

struct RhsTerms {
  bool nonlinear = true;  ///< F and G
  bool rotation = true;   ///< the d_theta coupling to the background
  bool operator==(const RhsTerms&) const = default;
};

/// Norm orders recorded with each sample; they follow from the functionals' s and sigma.
struct NormSpec {
  int s = 2;
  double sigma = 3.0 / 23.0;
  bool operator==(const NormSpec&) const = default;
};

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  double cfl_safety = 0.5;
  bool parity_enforcement = true;
  int sample_stride = 5;
  double leakage_abort_threshold = 1e-4;
  /// Corrector sweeps of the midpoint iteration; sweeps + 1 explicit evaluations per step.
  int corrector_iterations = 3;
  /// Abort when |u|_{H^2} exceeds this multiple of its initial value.
  double blowup_factor = 1e3;
  RhsTerms terms{};
  NormSpec norms{};
  bool keep_states = false;
  bool operator==(const SolverConfig&) const = default;
};

void validate(const SolverConfig& cfg);

struct Derivatives {
  VectorField u_t;
  VectorField b_t;
};

/// Reusable evaluator of the explicit part of the system,
///   E_u = P[(b + B0).grad b - u.grad u],  E_b = P[(b + B0).grad u - u.grad b],
/// with B0.grad = -d_theta. Fourteen FFTs per call; buffers are owned, so one
/// evaluator must not be shared between threads.
class RhsEvaluator {
 public:
  explicit RhsEvaluator(GridPtr grid);

  struct Extras {
    double max_u = 0.0;    ///< max |u_i| on the grid
    double max_b = 0.0;
    double leakage = 0.0;  ///< share of |u|^2 + |b|^2 outside the core
  };

  /// Explicit terms only (no viscosity), projected and dealiased.
  Derivatives explicit_terms(const VectorField& u, const VectorField& b, const RhsTerms& terms,
                             Extras* extras = nullptr);
  /// d_theta u and d_theta b (dealiased, not projected) as a by-product of one pass.
  std::pair<VectorField, VectorField> angular_derivatives(const VectorField& u, const VectorField& b);

 private:
  void to_physical(const ScalarField& f, double* out);
  void derivative_to_physical(const ScalarField& f, int axis, double* out);
  void to_spectral(const double* in, ScalarField& out);

  GridPtr grid_;
  AlignedVector<Complex> scratch_;
  AlignedVector<double> u1_, u2_, b1_, b2_;
  AlignedVector<double> u11_, u12_, u21_, b11_, b12_, b21_;
};

/// b.grad b - u.grad u and b.grad u - u.grad b, dealiased, not projected.
VectorField compute_F(const VectorField& u, const VectorField& b);
VectorField compute_G(const VectorField& u, const VectorField& b);

/// (u_t, b_t) of the perturbation system. Throws TruncationError when the state
/// leaks past `leakage_threshold` (pass a negative value to skip the check).
Derivatives rhs(const State& s, double leakage_threshold = 1e-4);
Derivatives linearized_rhs(const State& s);
Derivatives evaluate_rhs(RhsEvaluator& ev, const State& s, const RhsTerms& terms, double leakage_threshold,
                         RhsEvaluator::Extras* extras = nullptr);

/// One IMEX step: Crank-Nicolson viscosity, iterated explicit midpoint for the rest.
class Stepper {
 public:
  Stepper(GridPtr grid, SolverConfig cfg);
  State step(const State& s);
  /// Sum over steps of dt |grad u_mid|^2 with u_mid the step midpoint; the
  /// discrete dissipation that balances the energy exactly.
  double last_dissipation() const noexcept { return last_dissipation_; }
  const SolverConfig& config() const noexcept { return cfg_; }
  RhsEvaluator& evaluator() noexcept { return ev_; }

 private:
  GridPtr grid_;
  SolverConfig cfg_;
  RhsEvaluator ev_;
  std::vector<double> cn_explicit_;  // (1 - dt/2 k^2)
  std::vector<double> cn_inverse_;   // 1 / (1 + dt/2 k^2)
  double last_dissipation_ = 0.0;
};

State step(const State& s, const SolverConfig& cfg);

/// Per-sample record. Norm tables hold squared homogeneous norms of orders 0..size-1.
struct Sample {
  double t = 0.0;
  std::vector<double> u_hom, b_hom;      ///< orders 0..2s+7
  std::vector<double> ut_hom, bt_hom;    ///< orders 0..2s+1
  std::vector<double> dtu_hom, dtb_hom;  ///< orders 0..2s+1
  double u_neg = 0.0, b_neg = 0.0;       ///< squared H^-sigma (homogeneous)
  double u_one_minus = 0.0;              ///< squared homogeneous H^{1-sigma} of u
  double top_u = 0.0, top_b = 0.0;       ///< top-third share of H^{2s+6}
  double top_joint = 0.0;                ///< same share for the pair (u, b)
  double parity_err_u = 0.0, parity_err_b = 0.0;
  double zero_mode_max = 0.0;            ///< relative to the sup norm
  double leakage = 0.0;
  double divergence_u = 0.0, divergence_b = 0.0;
  double dissipation = 0.0;              ///< accumulated 2 int |grad u|^2
  double energy_law_drift = 0.0;
  std::optional<State> state;
};

struct Trajectory {
  NormSpec norms;
  RhsTerms terms;
  double dt = 0.0;
  int sample_stride = 1;
  double t0 = 0.0;
  long steps = 0;  ///< steps taken since t0
  std::vector<Sample> samples;
  State final_state;
  double initial_energy = 0.0;
  double initial_h2 = 0.0;
  double dissipation = 0.0;  ///< accumulated at the final state
  bool aborted = false;
  std::string abort_reason;
};

/// Builds a sample from a state (norm tables, parity, leakage, zero mode).
Sample make_sample(RhsEvaluator& ev, const State& s, const NormSpec& norms, const RhsTerms& terms,
                   const CircleAverager& circles, double leakage_threshold);

/// Integrates from `initial` to cfg.t_end. Errors in mid-run are recorded in
/// abort_reason rather than thrown; invalid configurations still throw.
Trajectory simulate(const State& initial, const SolverConfig& cfg);
/// Continues a trajectory to cfg.t_end with the same step and sampling.
void extend(Trajectory& traj, const SolverConfig& cfg);

enum class WaveForm {
  projected_angular,  ///< u_tt - Lap u_t - (P d_theta)^2 u - P F_t + P d_theta P G
  as_published        ///< P[u_tt - Lap u_t - d_theta^2 u - F_t + d_theta G]
};

/// Residual of the second-order wave identity at an interior sample, normalized
/// by |u|_{H^2}. Requires stored states and uniform sampling.
double wave_residual(const Trajectory& traj, std::size_t index, WaveForm form = WaveForm::projected_angular);

/// Roots of lambda^2 + k2 lambda + n^2 = 0, the scalar model of the linear wave
/// operator with Lap -> -k2 and d_theta^2 -> -n^2.
std::pair<std::complex<double>, std::complex<double>> dispersion_roots(double k2, int n);

}  // namespace mhdlab
