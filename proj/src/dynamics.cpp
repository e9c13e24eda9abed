#include "mhdlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mhdlab/errors.hpp"
#include "mhdlab/norms.hpp"

namespace mhdlab {

State::State(VectorField u_, VectorField b_, double t_) : u(std::move(u_)), b(std::move(b_)), t(t_) {}

State State::zero(GridPtr grid) {
  State s{VectorField(grid), VectorField(grid), 0.0};
  s.u.parity = ParityClass::velocity_like;
  s.b.parity = ParityClass::magnetic_like;
  s.u.divergence_free = true;
  s.b.divergence_free = true;
  return s;
}

void validate(const State& s) {
  for (const VectorField* v : {&s.u, &s.b}) {
    if ((*v)[0].empty() || (*v)[1].empty()) throw PreconditionError("state: empty field");
    require_same_grid(s.u.grid(), (*v)[0].grid(), "state");
    require_same_grid(s.u.grid(), (*v)[1].grid(), "state");
  }
  if (s.u.parity != ParityClass::velocity_like || s.b.parity != ParityClass::magnetic_like) {
    throw PreconditionError("state: u must be tagged velocity_like and b magnetic_like");
  }
  if (!s.u.divergence_free || !s.b.divergence_free) throw PreconditionError("state: fields must be divergence-free");
  if (parity_error(s.u, ParityClass::velocity_like) > 1e-10 || parity_error(s.b, ParityClass::magnetic_like) > 1e-10) {
    throw PreconditionError("state: parity tags do not hold");
  }
  if (relative_divergence(s.u) > 1e-10 || relative_divergence(s.b) > 1e-10) {
    throw PreconditionError("state: divergence-free flags do not hold");
  }
}

void validate(const SolverConfig& c) {
  std::ostringstream msg;
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) msg << "solver.dt must be > 0; ";
  if (!std::isfinite(c.t_end) || c.t_end < 0.0) msg << "solver.t_end must be >= 0; ";
  if (!(c.cfl_safety > 0.0 && c.cfl_safety <= 1.0)) msg << "solver.cfl_safety must lie in (0, 1]; ";
  if (c.sample_stride < 1) msg << "solver.sample_stride must be >= 1; ";
  if (!(c.leakage_abort_threshold > 0.0)) msg << "solver.leakage_abort_threshold must be > 0; ";
  if (c.corrector_iterations < 1 || c.corrector_iterations > 8) msg << "solver.corrector_iterations must lie in [1, 8]; ";
  if (!(c.blowup_factor > 1.0)) msg << "solver.blowup_factor must be > 1; ";
  if (c.norms.s < 1) msg << "functionals.s must be >= 1; ";
  if (!(c.norms.sigma > 0.0 && c.norms.sigma < 1.0)) msg << "functionals.sigma must lie in (0, 1); ";
  const std::string m = msg.str();
  if (!m.empty()) throw ConfigError(m.substr(0, m.size() - 2));
}

// ---------------------------------------------------------------------------

RhsEvaluator::RhsEvaluator(GridPtr grid) : grid_(std::move(grid)) {
  const std::size_t np = grid_->physical_size();
  scratch_.resize(grid_->spectral_size());
  for (auto* buf : {&u1_, &u2_, &b1_, &b2_, &u11_, &u12_, &u21_, &b11_, &b12_, &b21_}) buf->resize(np);
}

void RhsEvaluator::to_physical(const ScalarField& f, double* out) {
  std::copy(f.coeffs().begin(), f.coeffs().end(), scratch_.begin());
  grid_->execute_inverse(scratch_.data(), out);
}

void RhsEvaluator::derivative_to_physical(const ScalarField& f, int axis, double* out) {
  const Grid& g = *grid_;
  auto c = f.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double k = axis == 0 ? g.k1_deriv(i) : g.k2_deriv(i);
    scratch_[i] = Complex(-k * c[i].imag(), k * c[i].real());
  }
  g.execute_inverse(scratch_.data(), out);
}

void RhsEvaluator::to_spectral(const double* in, ScalarField& out) {
  if (out.empty()) out = ScalarField(grid_);
  grid_->execute_forward(in, out.coeffs().data());
  const double scale = 1.0 / static_cast<double>(grid_->physical_size());
  auto c = out.coeffs();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = grid_->kept(i) ? c[i] * scale : Complex{};
}

Derivatives RhsEvaluator::explicit_terms(const VectorField& u, const VectorField& b, const RhsTerms& terms,
                                         Extras* extras) {
  const Grid& g = *grid_;
  require_same_grid(g, u.grid(), "rhs");
  require_same_grid(g, b.grid(), "rhs");
  to_physical(u[0], u1_.data());
  to_physical(u[1], u2_.data());
  to_physical(b[0], b1_.data());
  to_physical(b[1], b2_.data());
  derivative_to_physical(u[0], 0, u11_.data());
  derivative_to_physical(u[0], 1, u12_.data());
  derivative_to_physical(u[1], 0, u21_.data());
  derivative_to_physical(b[0], 0, b11_.data());
  derivative_to_physical(b[0], 1, b12_.data());
  derivative_to_physical(b[1], 0, b21_.data());

  const auto V1 = g.rotation_x1();
  const auto V2 = g.rotation_x2();
  const auto core = g.core_mask();
  const double nl = terms.nonlinear ? 1.0 : 0.0;
  const double rot = terms.rotation ? 1.0 : 0.0;
  double max_u = 0.0, max_b = 0.0, outside = 0.0, total = 0.0;
  const std::size_t np = g.physical_size();
  for (std::size_t p = 0; p < np; ++p) {
    const double u1 = u1_[p], u2 = u2_[p], b1 = b1_[p], b2 = b2_[p];
    // Divergence-free inputs: d2 u2 = -d1 u1, d2 b2 = -d1 b1.
    const double u11 = u11_[p], u12 = u12_[p], u21 = u21_[p], u22 = -u11;
    const double b11 = b11_[p], b12 = b12_[p], b21 = b21_[p], b22 = -b11;
    // Transport by b + B0 (B0 = -V) and by u.
    const double c1 = nl * b1 - rot * V1[p];
    const double c2 = nl * b2 - rot * V2[p];
    const double a1 = nl * u1;
    const double a2 = nl * u2;
    u11_[p] = c1 * b11 + c2 * b12 - (a1 * u11 + a2 * u12);
    u12_[p] = c1 * b21 + c2 * b22 - (a1 * u21 + a2 * u22);
    u21_[p] = c1 * u11 + c2 * u12 - (a1 * b11 + a2 * b12);
    b11_[p] = c1 * u21 + c2 * u22 - (a1 * b21 + a2 * b22);
    if (extras) {
      max_u = std::max({max_u, std::abs(u1), std::abs(u2)});
      max_b = std::max({max_b, std::abs(b1), std::abs(b2)});
      const double e = u1 * u1 + u2 * u2 + b1 * b1 + b2 * b2;
      total += e;
      if (!core[p]) outside += e;
    }
  }
  Derivatives d{VectorField(grid_), VectorField(grid_)};
  to_spectral(u11_.data(), d.u_t[0]);
  to_spectral(u12_.data(), d.u_t[1]);
  to_spectral(u21_.data(), d.b_t[0]);
  to_spectral(b11_.data(), d.b_t[1]);
  d.u_t = leray_project(d.u_t);
  d.b_t = leray_project(d.b_t);
  d.u_t.parity = u.parity;
  d.b_t.parity = b.parity;
  if (extras) {
    extras->max_u = max_u;
    extras->max_b = max_b;
    extras->leakage = total > 0.0 ? outside / total : 0.0;
  }
  return d;
}

std::pair<VectorField, VectorField> RhsEvaluator::angular_derivatives(const VectorField& u, const VectorField& b) {
  const Grid& g = *grid_;
  const auto V1 = g.rotation_x1();
  const auto V2 = g.rotation_x2();
  const std::size_t np = g.physical_size();
  auto one = [&](const ScalarField& f, ScalarField& out) {
    derivative_to_physical(f, 0, u11_.data());
    derivative_to_physical(f, 1, u12_.data());
    for (std::size_t p = 0; p < np; ++p) u11_[p] = V1[p] * u11_[p] + V2[p] * u12_[p];
    to_spectral(u11_.data(), out);
  };
  VectorField du(grid_), db(grid_);
  one(u[0], du[0]);
  one(u[1], du[1]);
  one(b[0], db[0]);
  one(b[1], db[1]);
  if (u.parity) du.parity = opposite(*u.parity);
  if (b.parity) db.parity = opposite(*b.parity);
  return {std::move(du), std::move(db)};
}

// ---------------------------------------------------------------------------

namespace {

// a.grad c, componentwise, dealiased.
VectorField transport(const VectorField& a, const VectorField& c) {
  VectorField out(a.grid_ptr());
  for (int i = 0; i < 2; ++i) {
    out[i] = product(a[0], derivative(c[i], 0)) + product(a[1], derivative(c[i], 1));
  }
  return out;
}

}  // namespace

VectorField compute_F(const VectorField& u, const VectorField& b) {
  VectorField F = transport(b, b) - transport(u, u);
  F.parity = u.parity;
  return F;
}

VectorField compute_G(const VectorField& u, const VectorField& b) {
  VectorField G = transport(b, u) - transport(u, b);
  G.parity = b.parity;
  return G;
}

Derivatives evaluate_rhs(RhsEvaluator& ev, const State& s, const RhsTerms& terms, double leakage_threshold,
                         RhsEvaluator::Extras* extras) {
  RhsEvaluator::Extras local;
  Derivatives d = ev.explicit_terms(s.u, s.b, terms, &local);
  if (leakage_threshold >= 0.0 && local.leakage > leakage_threshold) {
    throw TruncationError("state leaks outside the window core: leakage " + std::to_string(local.leakage) +
                          " > " + std::to_string(leakage_threshold));
  }
  d.u_t += laplacian(s.u);
  d.u_t.divergence_free = true;
  d.b_t.divergence_free = true;
  if (extras) *extras = local;
  return d;
}

Derivatives rhs(const State& s, double leakage_threshold) {
  RhsEvaluator ev(s.grid_ptr());
  return evaluate_rhs(ev, s, RhsTerms{}, leakage_threshold);
}

Derivatives linearized_rhs(const State& s) {
  RhsEvaluator ev(s.grid_ptr());
  return evaluate_rhs(ev, s, RhsTerms{false, true}, -1.0);
}

// ---------------------------------------------------------------------------

Stepper::Stepper(GridPtr grid, SolverConfig cfg) : grid_(std::move(grid)), cfg_(cfg), ev_(grid_) {
  validate(cfg_);
  const std::size_t ns = grid_->spectral_size();
  cn_explicit_.resize(ns);
  cn_inverse_.resize(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    const double a = 0.5 * cfg_.dt * grid_->k_squared(i);
    cn_explicit_[i] = 1.0 - a;
    cn_inverse_[i] = 1.0 / (1.0 + a);
  }
}

namespace {

bool all_finite(const VectorField& v) {
  for (int c = 0; c < 2; ++c) {
    for (const auto& z : v[c].coeffs()) {
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
  }
  return true;
}

}  // namespace

State Stepper::step(const State& s) {
  require_same_grid(*grid_, s.grid(), "step");
  const double dt = cfg_.dt;
  const std::size_t ns = grid_->spectral_size();
  State next = s;
  for (int j = 0; j <= cfg_.corrector_iterations; ++j) {
    Derivatives e;
    if (j == 0) {
      RhsEvaluator::Extras ex;
      e = ev_.explicit_terms(s.u, s.b, cfg_.terms, &ex);
      const double speed = ex.max_u + (cfg_.terms.rotation ? grid_->max_window_speed() : 0.0);
      const double limit = speed > 0.0 ? cfg_.cfl_safety * grid_->dx() / speed : INFINITY;
      if (dt > limit) {
        throw CflError("dt = " + std::to_string(dt) + " violates the CFL bound " + std::to_string(limit), limit);
      }
      if (ex.leakage > cfg_.leakage_abort_threshold) {
        throw TruncationError("state leaks outside the window core: leakage " + std::to_string(ex.leakage));
      }
    } else {
      VectorField um = s.u + next.u;
      VectorField bm = s.b + next.b;
      um *= 0.5;
      bm *= 0.5;
      e = ev_.explicit_terms(um, bm, cfg_.terms);
    }
    for (int c = 0; c < 2; ++c) {
      auto un = s.u[c].coeffs();
      auto bn = s.b[c].coeffs();
      auto uo = next.u[c].coeffs();
      auto bo = next.b[c].coeffs();
      auto eu = e.u_t[c].coeffs();
      auto eb = e.b_t[c].coeffs();
      for (std::size_t i = 0; i < ns; ++i) {
        uo[i] = cn_inverse_[i] * (cn_explicit_[i] * un[i] + dt * eu[i]);
        bo[i] = bn[i] + dt * eb[i];
      }
    }
  }
  if (!all_finite(next.u) || !all_finite(next.b)) {
    throw NumericalError("non-finite values at t = " + std::to_string(s.t + dt));
  }
  if (cfg_.parity_enforcement) {
    next.u = parity_project(next.u, ParityClass::velocity_like);
    next.b = parity_project(next.b, ParityClass::magnetic_like);
  }
  next.u.parity = s.u.parity;
  next.b.parity = s.b.parity;
  next.u.divergence_free = true;
  next.b.divergence_free = true;

  // Discrete energy balance of the trapezoidal viscosity: dt |grad u_mid|^2.
  VectorField mid = s.u + next.u;
  mid *= 0.5;
  const auto h = homogeneous_norms_squared(mid, 1);
  last_dissipation_ = dt * h[1];
  next.t = s.t + dt;
  return next;
}

State step(const State& s, const SolverConfig& cfg) {
  Stepper st(s.grid_ptr(), cfg);
  return st.step(s);
}

// ---------------------------------------------------------------------------

Sample make_sample(RhsEvaluator& ev, const State& s, const NormSpec& norms, const RhsTerms& terms,
                   const CircleAverager& circles, double leakage_threshold) {
  Sample smp;
  smp.t = s.t;
  RhsEvaluator::Extras ex;
  const Derivatives d = evaluate_rhs(ev, s, terms, leakage_threshold, &ex);
  const auto [du, db] = ev.angular_derivatives(s.u, s.b);
  const int top = 2 * norms.s + 7;
  const int mid = 2 * norms.s + 1;
  smp.u_hom = homogeneous_norms_squared(s.u, top);
  smp.b_hom = homogeneous_norms_squared(s.b, top);
  smp.ut_hom = homogeneous_norms_squared(d.u_t, mid);
  smp.bt_hom = homogeneous_norms_squared(d.b_t, mid);
  smp.dtu_hom = homogeneous_norms_squared(du, mid);
  smp.dtb_hom = homogeneous_norms_squared(db, mid);
  smp.u_neg = std::pow(sobolev_norm(s.u, -norms.sigma, true), 2);
  smp.b_neg = std::pow(sobolev_norm(s.b, -norms.sigma, true), 2);
  smp.u_one_minus = std::pow(sobolev_norm(s.u, 1.0 - norms.sigma, true), 2);
  const auto [tu, mu] = top_third_mass(s.u, 2.0 * norms.s + 6.0);
  const auto [tb, mb] = top_third_mass(s.b, 2.0 * norms.s + 6.0);
  smp.top_u = mu > 0.0 ? tu / mu : 0.0;
  smp.top_b = mb > 0.0 ? tb / mb : 0.0;
  smp.top_joint = mu + mb > 0.0 ? (tu + tb) / (mu + mb) : 0.0;
  smp.parity_err_u = parity_error(s.u, ParityClass::velocity_like);
  smp.parity_err_b = parity_error(s.b, ParityClass::magnetic_like);
  double zm = 0.0;
  for (int c = 0; c < 2; ++c) {
    for (double a : circles.averages(s.u[c])) zm = std::max(zm, ex.max_u > 0.0 ? std::abs(a) / ex.max_u : 0.0);
    for (double a : circles.averages(s.b[c])) zm = std::max(zm, ex.max_b > 0.0 ? std::abs(a) / ex.max_b : 0.0);
  }
  smp.zero_mode_max = zm;
  smp.leakage = ex.leakage;
  smp.divergence_u = relative_divergence(s.u);
  smp.divergence_b = relative_divergence(s.b);
  return smp;
}

namespace {

double energy_of(const Sample& s) { return s.u_hom[0] + s.b_hom[0]; }

double h2_of(const Sample& s) { return std::sqrt(binomial_combination(s.u_hom, 2)); }

void record(Trajectory& traj, Sample smp, const State& s, bool keep) {
  smp.dissipation = traj.dissipation;
  const double e = energy_of(smp) + smp.dissipation;
  smp.energy_law_drift = traj.initial_energy > 0.0 ? (e - traj.initial_energy) / traj.initial_energy : 0.0;
  if (keep) smp.state = s;
  traj.samples.push_back(std::move(smp));
}

void run(Trajectory& traj, const SolverConfig& cfg) {
  const GridPtr& grid = traj.final_state.grid_ptr();
  Stepper stepper(grid, cfg);
  const CircleAverager circles(grid, core_radii(*grid));
  const long total = std::lround((cfg.t_end - traj.t0) / cfg.dt);
  State s = traj.final_state;
  try {
    while (traj.steps < total) {
      s = stepper.step(s);
      ++traj.steps;
      s.t = traj.t0 + traj.steps * cfg.dt;
      traj.dissipation += 2.0 * stepper.last_dissipation();
      traj.final_state = s;
      if (traj.steps % cfg.sample_stride == 0) {
        Sample smp = make_sample(stepper.evaluator(), s, cfg.norms, cfg.terms, circles, cfg.leakage_abort_threshold);
        const double h2 = h2_of(smp);
        record(traj, std::move(smp), s, cfg.keep_states);
        if (!std::isfinite(h2) || h2 > cfg.blowup_factor * traj.initial_h2) {
          throw NumericalError("|u|_H2 grew beyond " + std::to_string(cfg.blowup_factor) + "x its initial value");
        }
      }
    }
  } catch (const NumericalError& e) {
    traj.aborted = true;
    traj.abort_reason = std::string("numerical: ") + e.what();
  } catch (const TruncationError& e) {
    traj.aborted = true;
    traj.abort_reason = std::string("truncation: ") + e.what();
  }
}

}  // namespace

Trajectory simulate(const State& initial, const SolverConfig& cfg) {
  validate(cfg);
  validate(initial);
  if (cfg.t_end < initial.t) throw ConfigError("solver.t_end precedes the initial time");
  Trajectory traj;
  traj.norms = cfg.norms;
  traj.terms = cfg.terms;
  traj.dt = cfg.dt;
  traj.sample_stride = cfg.sample_stride;
  traj.t0 = initial.t;
  traj.final_state = initial;
  const GridPtr& grid = initial.grid_ptr();
  RhsEvaluator ev(grid);
  const CircleAverager circles(grid, core_radii(*grid));
  Sample first = make_sample(ev, initial, cfg.norms, cfg.terms, circles, cfg.leakage_abort_threshold);
  traj.initial_energy = energy_of(first);
  traj.initial_h2 = h2_of(first);
  if (traj.initial_h2 == 0.0) traj.initial_h2 = INFINITY;  // zero data cannot blow up
  record(traj, std::move(first), initial, cfg.keep_states);
  run(traj, cfg);
  return traj;
}

void extend(Trajectory& traj, const SolverConfig& cfg) {
  validate(cfg);
  if (traj.aborted) throw PreconditionError("extend: trajectory was aborted: " + traj.abort_reason);
  if (cfg.dt != traj.dt || cfg.sample_stride != traj.sample_stride) {
    throw ConfigError("extend: dt and sample_stride must match the trajectory");
  }
  traj.norms = cfg.norms;
  traj.terms = cfg.terms;
  run(traj, cfg);
}

// ---------------------------------------------------------------------------

double wave_residual(const Trajectory& traj, std::size_t index, WaveForm form) {
  const auto& smp = traj.samples;
  if (index == 0 || index + 1 >= smp.size()) throw PreconditionError("wave_residual: index needs two neighbours");
  const Sample& a = smp[index - 1];
  const Sample& m = smp[index];
  const Sample& c = smp[index + 1];
  if (!a.state || !m.state || !c.state) throw PreconditionError("wave_residual: trajectory has no stored states");
  const double h = m.t - a.t;
  if (!(h > 0.0) || std::abs((c.t - m.t) - h) > 1e-9 * h) {
    throw PreconditionError("wave_residual: sampling is not uniform");
  }
  const State& sm = *m.state;
  const double norm = sobolev_norm(sm.u, 2.0, false);
  if (norm == 0.0) return 0.0;

  RhsEvaluator ev(sm.grid_ptr());
  const VectorField ut_a = evaluate_rhs(ev, *a.state, traj.terms, -1.0).u_t;
  const VectorField ut_m = evaluate_rhs(ev, sm, traj.terms, -1.0).u_t;
  const VectorField ut_c = evaluate_rhs(ev, *c.state, traj.terms, -1.0).u_t;

  VectorField res = ut_c - ut_a;
  res *= 1.0 / (2.0 * h);
  res -= laplacian(ut_m);

  const bool rot = traj.terms.rotation;
  const bool nl = traj.terms.nonlinear;
  VectorField F_t(sm.grid_ptr());
  VectorField G(sm.grid_ptr());
  if (nl) {
    F_t = compute_F(c.state->u, c.state->b) - compute_F(a.state->u, a.state->b);
    F_t *= 1.0 / (2.0 * h);
    G = compute_G(sm.u, sm.b);
  }
  if (form == WaveForm::projected_angular) {
    if (rot) res -= leray_project(d_theta_unchecked(leray_project(d_theta_unchecked(sm.u))));
    if (nl) {
      res -= leray_project(F_t);
      if (rot) res += leray_project(d_theta_unchecked(leray_project(G)));
    }
  } else {
    if (rot) res -= d_theta_unchecked(d_theta_unchecked(sm.u));
    if (nl) {
      res -= F_t;
      if (rot) res += d_theta_unchecked(G);
    }
    res = leray_project(res);
  }
  return l2_norm(res) / norm;
}

std::pair<std::complex<double>, std::complex<double>> dispersion_roots(double k2, int n) {
  using C = std::complex<double>;
  const double nn = static_cast<double>(n) * n;
  const double disc = k2 * k2 - 4.0 * nn;
  if (disc >= 0.0) {
    // Cancellation-free pair: q is the larger-magnitude root, the other is nn / q.
    const double q = -0.5 * (k2 + std::sqrt(disc));
    if (q == 0.0) return {C(0.0), C(0.0)};
    return {C(q), C(nn / q)};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {C(-0.5 * k2, im), C(-0.5 * k2, -im)};
}

}  // namespace mhdlab
