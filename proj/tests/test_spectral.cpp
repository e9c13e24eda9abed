#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "mhdlab/errors.hpp"
#include "mhdlab/norms.hpp"
#include "mhdlab/spectral.hpp"
#include "test_util.hpp"

using namespace mhdlab;
using Catch::Approx;

TEST_CASE("grid validation rejects bad sizes and boxes", "[grid]") {
  GridSpec s;
  s.n = 30;
  CHECK_THROWS_AS(Grid::make(s), ConfigError);
  s.n = 34;  // prime factor 17
  CHECK_THROWS_AS(Grid::make(s), ConfigError);
  s.n = 33;
  CHECK_THROWS_AS(Grid::make(s), ConfigError);
  s.n = 96;
  CHECK_NOTHROW(Grid::make(s));
  s.box_half_length = 0.0;
  CHECK_THROWS_AS(Grid::make(s), ConfigError);
  s.box_half_length = 1.0;
  s.dealias_fraction = 1.5;
  CHECK_THROWS_AS(Grid::make(s), ConfigError);
}

TEST_CASE("grid coordinates put the origin at index zero", "[grid]") {
  auto g = testutil::grid(64, 1.0);
  CHECK(g->coordinate(0) == 0.0);
  CHECK(g->coordinate(1) == Approx(g->dx()));
  CHECK(g->coordinate(63) == Approx(-g->dx()));
  CHECK(g->coordinate(32) == Approx(-std::numbers::pi));
}

TEST_CASE("window is exact on the core and vanishes near the boundary", "[grid]") {
  auto g = testutil::grid(64, 2.0);
  CHECK(g->window(0.0) == 1.0);
  CHECK(g->window(g->core_radius()) == 1.0);
  CHECK(g->window(g->outer_radius()) == 0.0);
  double prev = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double r = g->core_radius() + (g->outer_radius() - g->core_radius()) * i / 100.0;
    const double w = g->window(r);
    CHECK(w <= prev + 1e-15);
    CHECK(w >= 0.0);
    prev = w;
  }
}

TEST_CASE("single mode transforms to a single coefficient", "[spectral]") {
  auto g = testutil::grid(32, 1.5);
  const double L = g->box_half_length();
  auto p = PhysicalField::sample(g, [&](double x1, double x2) { return std::cos((2 * x1 + 3 * x2) / L); });
  ScalarField f = forward_transform(p);
  const std::size_t idx = 2 * g->nk() + 3;
  CHECK(std::abs(f[idx] - Complex(0.5, 0.0)) < 1e-14);
  double others = 0.0;
  for (std::size_t i = 0; i < f.coeffs().size(); ++i) {
    if (i != idx) others = std::max(others, std::abs(f[i]));
  }
  CHECK(others < 1e-14);
  CHECK(testutil::max_diff(inverse_transform(f), p) < 1e-13);
}

TEST_CASE("derivatives match analytic derivatives", "[spectral]") {
  auto g = testutil::grid(48, 1.0);
  auto p = PhysicalField::sample(g, [](double x1, double x2) { return std::sin(2 * x1) * std::cos(x2); });
  auto d1 = PhysicalField::sample(g, [](double x1, double x2) { return 2 * std::cos(2 * x1) * std::cos(x2); });
  auto d2 = PhysicalField::sample(g, [](double x1, double x2) { return -std::sin(2 * x1) * std::sin(x2); });
  ScalarField f = forward_transform(p);
  CHECK(testutil::max_diff(inverse_transform(derivative(f, 0)), d1) < 1e-12);
  CHECK(testutil::max_diff(inverse_transform(derivative(f, 1)), d2) < 1e-12);
  auto lap = PhysicalField::sample(g, [](double x1, double x2) { return -5 * std::sin(2 * x1) * std::cos(x2); });
  CHECK(testutil::max_diff(inverse_transform(laplacian(f)), lap) < 1e-12);
}

TEST_CASE("fractional multiplier acts on eigenfunctions", "[spectral]") {
  auto g = testutil::grid(32, 2.0);
  auto p = PhysicalField::sample(g, [](double x1, double x2) { return std::sin(1.5 * x1 + x2); });
  ScalarField f = forward_transform(p);
  const double k = std::hypot(1.5, 1.0);
  for (double s : {-0.5, 0.5, 1.0, 2.7}) {
    ScalarField m = fractional_multiplier(f, s);
    CHECK(l2_norm(m) == Approx(std::pow(k, s) * l2_norm(f)).epsilon(1e-12));
  }
  ScalarField c = f;
  c[0] = 1.0;
  CHECK_THROWS_AS(fractional_multiplier(c, -0.5), PreconditionError);
  CHECK_NOTHROW(fractional_multiplier(c, -0.5, ZeroModePolicy::zero));
  // Lambda^a Lambda^b = Lambda^{a+b}
  ScalarField r = testutil::random_modes(g, 3);
  r[0] = 0.0;
  ScalarField ab = fractional_multiplier(fractional_multiplier(r, 0.7), -1.3);
  ScalarField direct = fractional_multiplier(r, -0.6);
  CHECK(l2_norm(ab - direct) < 1e-12 * l2_norm(direct));
}

TEST_CASE("helmholtz solve inverts I - alpha Laplacian", "[spectral]") {
  auto g = testutil::grid(32, 1.0);
  ScalarField f = testutil::random_modes(g, 7);
  ScalarField u = helmholtz_solve(f, 0.3);
  ScalarField back = u - 0.3 * laplacian(u);
  CHECK(l2_norm(back - f) < 1e-12 * l2_norm(f));
  CHECK(l2_norm(helmholtz_solve(f, 0.0) - f) == 0.0);
  CHECK_THROWS_AS(helmholtz_solve(f, -1.0), PreconditionError);
}

TEST_CASE("dealias mask is radial and strict", "[spectral]") {
  auto g = testutil::grid(48, 1.0);
  const double cut = g->dealias_radius();
  for (std::size_t i = 0; i < g->spectral_size(); ++i) {
    CHECK(g->kept(i) == (std::sqrt(g->k_squared(i)) < cut));
  }
  ScalarField r = testutil::random_modes(g, 1, 40.0);
  ScalarField d = dealias(r);
  CHECK(l2_norm(dealias(d) - d) == 0.0);
  CHECK(l2_norm(d) <= l2_norm(r));
}

TEST_CASE("product of dealiased fields is exact", "[spectral]") {
  auto g = testutil::grid(32, 1.0);
  auto a = forward_transform(PhysicalField::sample(g, [](double x1, double x2) { return std::sin(3 * x1) + std::cos(x2); }));
  auto b = forward_transform(PhysicalField::sample(g, [](double x1, double x2) { return std::cos(2 * x1 + 2 * x2); }));
  ScalarField ab = product(a, b);
  auto exact = PhysicalField::sample(g, [](double x1, double x2) {
    return (std::sin(3 * x1) + std::cos(x2)) * std::cos(2 * x1 + 2 * x2);
  });
  CHECK(testutil::max_diff(inverse_transform(ab), exact) < 1e-13);
}

TEST_CASE("prolongation preserves the represented function", "[spectral]") {
  auto g = testutil::grid(32, 1.3);
  auto fine = g->refined(2);
  ScalarField f = testutil::random_modes(g, 11);
  ScalarField pf = prolong(f, fine);
  CHECK(l2_norm(pf) == Approx(l2_norm(f)).epsilon(1e-13));
  auto sample_fine = inverse_transform(pf);
  auto sample_coarse = inverse_transform(f);
  double m = 0.0;
  for (int i1 = 0; i1 < 32; ++i1) {
    for (int i2 = 0; i2 < 32; ++i2) {
      const std::size_t pc = static_cast<std::size_t>(i1) * 32 + i2;
      const std::size_t pfi = static_cast<std::size_t>(2 * i1) * 64 + 2 * i2;
      m = std::max(m, std::abs(sample_fine[pfi] - sample_coarse[pc]));
    }
  }
  CHECK(m < 1e-12);
  auto other = testutil::grid(32, 2.0);
  CHECK_THROWS_AS(prolong(f, other), ConfigError);
}

TEST_CASE("leray projection yields divergence-free fields and kills gradients", "[spectral]") {
  auto g = testutil::grid(64, 1.0);
  VectorField v{testutil::random_modes(g, 1), testutil::random_modes(g, 2)};
  VectorField pv = leray_project(v);
  CHECK(pv.divergence_free);
  CHECK(relative_divergence(pv) < 1e-13);
  CHECK(l2_norm(leray_project(pv) - pv) < 1e-13 * l2_norm(pv));
  CHECK(l2_norm(pv) <= l2_norm(v) + 1e-14);
  ScalarField phi = testutil::random_modes(g, 3);
  VectorField grad{derivative(phi, 0), derivative(phi, 1)};
  CHECK(l2_norm(leray_project(grad)) < 1e-13 * l2_norm(grad));
  // Orthogonality of the removed part.
  CHECK(std::abs(inner(pv, v - pv)) < 1e-12 * l2_norm(v) * l2_norm(v));
}

TEST_CASE("mixed grids are rejected", "[spectral]") {
  auto a = testutil::grid(32, 1.0);
  auto b = testutil::grid(64, 1.0);
  CHECK_THROWS_AS(ScalarField(a) + ScalarField(b), ConfigError);
}

TEST_CASE("sobolev norms", "[norms]") {
  auto g = testutil::grid(32, 2.0);
  auto p = PhysicalField::sample(g, [](double x1, double x2) { return std::cos(x1 + 0.5 * x2); });
  ScalarField f = forward_transform(p);
  const double k = std::hypot(1.0, 0.5);
  // L2 over the box: |cos|^2 averages to 1/2.
  CHECK(sobolev_norm(f, 0.0, true) == Approx(std::sqrt(0.5 * g->area())).epsilon(1e-13));
  for (double s : {-0.3, 1.0, 2.5}) {
    CHECK(sobolev_norm(f, s, true) == Approx(std::pow(k, s) * l2_norm(f)).epsilon(1e-12));
    CHECK(sobolev_norm(f, s, false) == Approx(std::pow(1 + k * k, 0.5 * s) * l2_norm(f)).epsilon(1e-12));
  }
  // Parseval against grid quadrature.
  ScalarField r = testutil::random_modes(g, 5);
  auto rp = inverse_transform(r);
  double q = 0.0;
  for (double x : rp.values()) q += x * x;
  CHECK(sobolev_norm(r, 0.0, true) == Approx(std::sqrt(q * g->cell_area())).epsilon(1e-12));
  ScalarField c = r;
  c[0] = 1.0;
  CHECK_THROWS_AS(sobolev_norm(c, -0.2, true), PreconditionError);
  CHECK_NOTHROW(sobolev_norm(c, -0.2, false));
}

TEST_CASE("norm tables and binomial identities agree with direct norms", "[norms]") {
  auto g = testutil::grid(32, 1.0);
  ScalarField r = testutil::random_modes(g, 9);
  const auto h = homogeneous_norms_squared(r, 6);
  for (int j = 0; j <= 6; ++j) CHECK(h[j] == Approx(std::pow(sobolev_norm(r, j, true), 2)).epsilon(1e-12));
  for (int n = 0; n <= 5; ++n) {
    CHECK(binomial_combination(h, n) == Approx(std::pow(sobolev_norm(r, n, false), 2)).epsilon(1e-12));
  }
  // |grad f|^2_{H^n} = sum C(n, j) |f|^2_{H^{j+1}}
  ScalarField d1 = derivative(r, 0);
  ScalarField d2 = derivative(r, 1);
  const double grad_h3 = std::pow(sobolev_norm(d1, 3, false), 2) + std::pow(sobolev_norm(d2, 3, false), 2);
  CHECK(binomial_combination(h, 3, 1) == Approx(grad_h3).epsilon(1e-12));
  CHECK_THROWS_AS(binomial_combination(h, 6, 1), PreconditionError);
}

TEST_CASE("interpolation between homogeneous norms holds on random fields", "[norms][property]") {
  auto g = testutil::grid(32, 1.0);
  for (unsigned seed = 0; seed < 20; ++seed) {
    ScalarField r = testutil::random_modes(g, seed, 6.0);
    const double h0 = sobolev_norm(r, 0, true);
    const double h1 = sobolev_norm(r, 1, true);
    const double h2 = sobolev_norm(r, 2, true);
    CHECK(h1 <= std::sqrt(h0 * h2) * (1 + 1e-12));
    // Homogeneity of degree one.
    CHECK(sobolev_norm(3.0 * r, 2, true) == Approx(3.0 * h2).epsilon(1e-13));
  }
}
