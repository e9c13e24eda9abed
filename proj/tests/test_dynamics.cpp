#include <catch_amalgamated.hpp>

#include <cmath>

#include "mhdlab/dynamics.hpp"
#include "mhdlab/errors.hpp"
#include "mhdlab/norms.hpp"
#include "test_util.hpp"

using namespace mhdlab;
using Catch::Approx;

namespace {

Envelope small_envelope() {
  Envelope e;
  e.k0 = 1.0;
  e.radius = 1.0;
  e.carrier_spacing = 0.5;
  return e;
}

State random_state(const GridPtr& g, double amplitude, std::uint64_t seed = 11) {
  State s(random_symmetric_field(g, seed, small_envelope(), ParityClass::velocity_like, amplitude),
          random_symmetric_field(g, seed + 1, small_envelope(), ParityClass::magnetic_like, amplitude));
  return s;
}

double state_diff(const State& a, const State& b) {
  return l2_norm(a.u - b.u) + l2_norm(a.b - b.b);
}

double state_norm(const State& a) { return l2_norm(a.u) + l2_norm(a.b); }

}  // namespace

TEST_CASE("the zero state is a fixed point", "[dynamics]") {
  auto g = testutil::grid(32, 2.0);
  State z = State::zero(g);
  const auto d = rhs(z);
  CHECK(max_coefficient(d.u_t[0]) == 0.0);
  CHECK(max_coefficient(d.b_t[1]) == 0.0);
  SolverConfig cfg;
  cfg.t_end = 0.01;
  const auto traj = simulate(z, cfg);
  CHECK_FALSE(traj.aborted);
  CHECK(state_norm(traj.final_state) == 0.0);
  CHECK(traj.samples.back().energy_law_drift == 0.0);
}

TEST_CASE("pure diffusion reproduces the Crank-Nicolson factor", "[dynamics]") {
  auto g = testutil::grid(32, 2.0);
  ScalarField phi = forward_transform(PhysicalField::sample(g, [](double x1, double x2) {
    return std::sin(x1) * std::sin(1.5 * x2);
  }));
  State s = State::zero(g);
  s.u = from_stream(phi, ParityClass::velocity_like);
  SolverConfig cfg;
  cfg.dt = 0.05;
  cfg.terms = {false, false};
  cfg.leakage_abort_threshold = 2.0;
  Stepper st(g, cfg);
  State next = st.step(s);
  const double k2 = 1.0 + 2.25;
  const double a = 0.5 * cfg.dt * k2;
  VectorField expect = s.u;
  expect *= (1.0 - a) / (1.0 + a);
  CHECK(l2_norm(next.u - expect) < 1e-14 * l2_norm(s.u));
  CHECK(l2_norm(next.b) == 0.0);
}

TEST_CASE("nonlinear terms vanish for u = b and are antisymmetric", "[dynamics][property]") {
  auto g = testutil::grid(64, 2.0);
  const State s = random_state(g, 1.0);
  CHECK(max_coefficient(compute_F(s.u, s.u)[0]) < 1e-15);
  CHECK(max_coefficient(compute_G(s.u, s.u)[1]) < 1e-15);
  const double scale = l2_norm(compute_F(s.u, s.b));
  CHECK(l2_norm(compute_F(s.u, s.b) + compute_F(s.b, s.u)) < 1e-13 * scale);
  CHECK(l2_norm(compute_G(s.u, s.b) + compute_G(s.b, s.u)) < 1e-13 * scale);
}

TEST_CASE("nonlinear terms match a pointwise evaluation for band-limited fields", "[dynamics]") {
  auto g = testutil::grid(64, 2.0);
  // Low modes only: every product is resolved, so dealiasing changes nothing.
  VectorField u = from_stream(testutil::random_modes(g, 1, 2.0));
  VectorField b = from_stream(testutil::random_modes(g, 2, 2.0));
  const VectorField F = compute_F(u, b);
  const VectorField G = compute_G(u, b);
  auto phys = [](const ScalarField& f) { return inverse_transform(f); };
  const auto U1 = phys(u[0]), U2 = phys(u[1]), B1 = phys(b[0]), B2 = phys(b[1]);
  std::array<PhysicalField, 2> dU1{phys(derivative(u[0], 0)), phys(derivative(u[0], 1))};
  std::array<PhysicalField, 2> dU2{phys(derivative(u[1], 0)), phys(derivative(u[1], 1))};
  std::array<PhysicalField, 2> dB1{phys(derivative(b[0], 0)), phys(derivative(b[0], 1))};
  std::array<PhysicalField, 2> dB2{phys(derivative(b[1], 0)), phys(derivative(b[1], 1))};
  PhysicalField F1(g), F2(g), G1(g), G2(g);
  for (std::size_t p = 0; p < g->physical_size(); ++p) {
    F1[p] = B1[p] * dB1[0][p] + B2[p] * dB1[1][p] - U1[p] * dU1[0][p] - U2[p] * dU1[1][p];
    F2[p] = B1[p] * dB2[0][p] + B2[p] * dB2[1][p] - U1[p] * dU2[0][p] - U2[p] * dU2[1][p];
    G1[p] = B1[p] * dU1[0][p] + B2[p] * dU1[1][p] - U1[p] * dB1[0][p] - U2[p] * dB1[1][p];
    G2[p] = B1[p] * dU2[0][p] + B2[p] * dU2[1][p] - U1[p] * dB2[0][p] - U2[p] * dB2[1][p];
  }
  const double scale = max_abs(F) + max_abs(G);
  CHECK(testutil::max_diff(phys(F[0]), F1) < 1e-12 * scale);
  CHECK(testutil::max_diff(phys(F[1]), F2) < 1e-12 * scale);
  CHECK(testutil::max_diff(phys(G[0]), G1) < 1e-12 * scale);
  CHECK(testutil::max_diff(phys(G[1]), G2) < 1e-12 * scale);
}

TEST_CASE("the right-hand side assembles viscosity, coupling and nonlinearity", "[dynamics]") {
  auto g = testutil::grid(64, 2.0);
  const State s = random_state(g, 1.0);
  const auto lin = linearized_rhs(s);
  const VectorField dtu = d_theta(s.u);
  const VectorField dtb = d_theta(s.b);
  // B0 . grad = -d_theta.
  VectorField ut = laplacian(s.u) - leray_project(dtb);
  VectorField bt = -1.0 * leray_project(dtu);
  const double scale = l2_norm(lin.u_t) + l2_norm(lin.b_t);
  CHECK(l2_norm(lin.u_t - ut) < 1e-12 * scale);
  CHECK(l2_norm(lin.b_t - bt) < 1e-12 * scale);

  const auto full = rhs(s);
  CHECK(l2_norm(full.u_t - lin.u_t - leray_project(compute_F(s.u, s.b))) < 1e-12 * scale);
  CHECK(l2_norm(full.b_t - lin.b_t - leray_project(compute_G(s.u, s.b))) < 1e-12 * scale);
  CHECK(relative_divergence(full.u_t) < 1e-12);
  CHECK(relative_divergence(full.b_t) < 1e-12);
  CHECK(parity_error(full.u_t, ParityClass::velocity_like) < 1e-12);
  CHECK(parity_error(full.b_t, ParityClass::magnetic_like) < 1e-12);
}

TEST_CASE("the right-hand side satisfies the energy identity", "[dynamics][property]") {
  auto g = testutil::grid(64, 2.0);
  const State s = random_state(g, 1.0);
  for (const auto& d : {rhs(s), linearized_rhs(s)}) {
    const double power = inner(d.u_t, s.u) + inner(d.b_t, s.b);
    const double diss = homogeneous_norms_squared(s.u, 1)[1];
    CHECK(std::abs(power + diss) < 1e-10 * diss);
  }
}

TEST_CASE("azimuthal magnetic fields are steady under the linear flow", "[dynamics]") {
  // b = g(r) e_theta: d_theta b is a gradient, so its projection vanishes.
  auto g = testutil::grid(128, 2.0);
  ScalarField phi = forward_transform(PhysicalField::sample(g, [](double x1, double x2) {
    return std::exp(-(x1 * x1 + x2 * x2));
  }));
  State s = State::zero(g);
  s.b = parity_project(from_stream(phi), ParityClass::magnetic_like);
  const auto d = linearized_rhs(s);
  CHECK(l2_norm(d.u_t) < 1e-10 * l2_norm(s.b));
  CHECK(l2_norm(d.b_t) == 0.0);
  CHECK(l2_norm(d_theta(s.b)) > 0.1 * l2_norm(s.b));
}

TEST_CASE("solver preserves parity without enforcement", "[dynamics][property]") {
  auto g = testutil::grid(64, 2.0);
  SolverConfig cfg;
  cfg.parity_enforcement = false;
  cfg.dt = 2e-3;
  cfg.t_end = 0.2;
  cfg.sample_stride = 20;
  const auto traj = simulate(random_state(g, 0.5), cfg);
  REQUIRE_FALSE(traj.aborted);
  for (const auto& smp : traj.samples) {
    CHECK(smp.parity_err_u < 1e-12);
    CHECK(smp.parity_err_b < 1e-12);
    CHECK(smp.divergence_u < 1e-12);
  }
}

TEST_CASE("energy law holds along a nonlinear run", "[dynamics][property]") {
  auto g = testutil::grid(64, 2.0);
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.4;
  cfg.sample_stride = 10;
  const auto traj = simulate(random_state(g, 0.5), cfg);
  REQUIRE_FALSE(traj.aborted);
  for (const auto& smp : traj.samples) CHECK(std::abs(smp.energy_law_drift) < 1e-10);
  CHECK(traj.samples.back().u_hom[0] < traj.samples.front().u_hom[0] + traj.samples.front().b_hom[0]);
}

TEST_CASE("extending a trajectory matches a single run", "[dynamics]") {
  auto g = testutil::grid(32, 2.0);
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = 0.1;
  cfg.sample_stride = 5;
  const State s0 = random_state(g, 0.5);
  const auto whole = simulate(s0, cfg);
  SolverConfig half = cfg;
  half.t_end = 0.05;
  auto part = simulate(s0, half);
  extend(part, cfg);
  REQUIRE(part.samples.size() == whole.samples.size());
  CHECK(state_diff(part.final_state, whole.final_state) == 0.0);
  CHECK(part.final_state.t == whole.final_state.t);
  CHECK(part.samples.back().energy_law_drift == whole.samples.back().energy_law_drift);
  SolverConfig other = cfg;
  other.dt = 1e-3;
  CHECK_THROWS_AS(extend(part, other), ConfigError);
}

TEST_CASE("solver is second order in time", "[dynamics]") {
  auto g = testutil::grid(32, 2.0);
  const State s0 = random_state(g, 2.0);
  auto run = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 0.2;
    cfg.sample_stride = 1000;
    return simulate(s0, cfg).final_state;
  };
  const State a = run(0.02), b = run(0.01), c = run(0.005);
  const double order = std::log2(state_diff(a, b) / state_diff(b, c));
  CHECK(order > 1.9);
  CHECK(order < 2.1);
}

TEST_CASE("the CFL guard rejects oversized steps", "[dynamics]") {
  auto g = testutil::grid(32, 2.0);
  SolverConfig cfg;
  cfg.dt = 1.0;
  Stepper st(g, cfg);
  try {
    st.step(random_state(g, 0.5));
    FAIL("no CFL error");
  } catch (const CflError& e) {
    CHECK(e.suggested_dt() > 0.0);
    CHECK(e.suggested_dt() < 1.0);
  }
  cfg.t_end = 2.0;
  const auto traj = simulate(random_state(g, 0.5), cfg);
  CHECK(traj.aborted);
  CHECK(traj.abort_reason.find("CFL") != std::string::npos);
}

TEST_CASE("solver configuration errors are collected", "[dynamics]") {
  SolverConfig cfg;
  cfg.dt = -1.0;
  cfg.sample_stride = 0;
  try {
    validate(cfg);
    FAIL("accepted invalid config");
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    CHECK(m.find("dt") != std::string::npos);
    CHECK(m.find("sample_stride") != std::string::npos);
  }
}

TEST_CASE("wave identity residual converges at second order on linear runs", "[dynamics]") {
  auto g = testutil::grid(64, 2.0);
  const State s0 = random_state(g, 1.0);
  auto residual = [&](int stride, WaveForm form) {
    SolverConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 0.1;
    cfg.sample_stride = stride;
    cfg.terms = {false, true};
    cfg.keep_states = true;
    const auto traj = simulate(s0, cfg);
    // Sample closest to t = 0.05.
    const std::size_t idx = static_cast<std::size_t>(std::lround(0.05 / (cfg.dt * stride)));
    return wave_residual(traj, idx, form);
  };
  const double r1 = residual(20, WaveForm::projected_angular);
  const double r2 = residual(10, WaveForm::projected_angular);
  const double order = std::log2(r1 / r2);
  CHECK(order > 1.8);
  CHECK(order < 2.2);
  // The unprojected second angular derivative misses a gradient part: an O(1) defect.
  const double fine = residual(1, WaveForm::projected_angular);
  CHECK(fine < 1e-3);
  CHECK(residual(1, WaveForm::as_published) > 100.0 * fine);
}

TEST_CASE("dispersion roots satisfy Vieta's identities", "[dynamics]") {
  for (double k2 : {0.0, 0.5, 2.0, 3.0, 1e3}) {
    for (int n : {0, 1, 2, 5}) {
      const auto [a, b] = dispersion_roots(k2, n);
      CHECK(std::abs((a + b) + k2) <= 1e-14 * std::max(1.0, k2));
      CHECK(std::abs(a * b - double(n) * n) <= 1e-14 * std::max(1.0, double(n) * n));
      if (n == 0) CHECK(std::min(std::abs(a), std::abs(b)) == 0.0);
    }
  }
  const auto [a, b] = dispersion_roots(2.0, 1);
  CHECK(a == b);
  CHECK(a.real() == Approx(-1.0));
}
