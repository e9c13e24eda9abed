#include "mhdlab/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "mhdlab/errors.hpp"

namespace mhdlab {

namespace {

// FFTW's planner is not thread-safe; execution with the new-array interface is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

bool has_small_factors(int n) {
  for (int p : {2, 3, 5, 7}) {
    while (n % p == 0) n /= p;
  }
  return n == 1;
}

// 1 - smoothstep of order 9 (C^4 at both ends).
double taper(double t) {
  if (t <= 0.0) return 1.0;
  if (t >= 1.0) return 0.0;
  const double t2 = t * t;
  const double t5 = t2 * t2 * t;
  const double s = t5 * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + t * 70.0))));
  return 1.0 - s;
}

}  // namespace

void validate(const GridSpec& spec) {
  if (spec.n < 32 || spec.n % 2 != 0 || !has_small_factors(spec.n)) {
    throw ConfigError("grid.n must be even, >= 32 and have only prime factors 2, 3, 5, 7 (got " +
                      std::to_string(spec.n) + ")");
  }
  if (!(spec.box_half_length > 0.0) || !std::isfinite(spec.box_half_length)) {
    throw ConfigError("grid.box_half_length must be > 0");
  }
  if (!(spec.dealias_fraction > 0.0 && spec.dealias_fraction <= 1.0)) {
    throw ConfigError("grid.dealias_fraction must lie in (0, 1]");
  }
  if (!(spec.window_core_fraction > 0.0 && spec.window_core_fraction < kWindowOuterFraction)) {
    throw ConfigError("grid.window_core_fraction must lie in (0, 0.95)");
  }
}

GridPtr Grid::make(const GridSpec& spec) {
  validate(spec);
  return GridPtr(new Grid(spec));
}

Grid::Grid(const GridSpec& spec) : spec_(spec) {
  const int n = spec_.n;
  const int nk = n / 2 + 1;
  const double L = spec_.box_half_length;
  dx_ = 2.0 * std::numbers::pi * L / n;
  area_ = std::pow(2.0 * std::numbers::pi * L, 2);

  const std::size_t ns = spectral_size();
  k1_.resize(ns);
  k2_.resize(ns);
  k1d_.resize(ns);
  k2d_.resize(ns);
  ksq_.resize(ns);
  mult_.resize(ns);
  mask_.resize(ns);
  const double mcut = spec_.dealias_fraction * n / 2.0;
  kcut_ = mcut / L;
  for (int i1 = 0; i1 < n; ++i1) {
    const int m1 = signed_mode(i1);
    for (int j2 = 0; j2 < nk; ++j2) {
      const std::size_t idx = static_cast<std::size_t>(i1) * nk + j2;
      const int m2 = j2;
      k1_[idx] = m1 / L;
      k2_[idx] = m2 / L;
      k1d_[idx] = (2 * i1 == n) ? 0.0 : m1 / L;
      k2d_[idx] = (2 * j2 == n) ? 0.0 : m2 / L;
      ksq_[idx] = (double(m1) * m1 + double(m2) * m2) / (L * L);
      mult_[idx] = (j2 == 0 || 2 * j2 == n) ? 1.0 : 2.0;
      mask_[idx] = (double(m1) * m1 + double(m2) * m2 < mcut * mcut) ? 1 : 0;
    }
  }

  const std::size_t np = physical_size();
  rot1_.resize(np);
  rot2_.resize(np);
  core_.resize(np);
  const double rc = core_radius();
  for (int i1 = 0; i1 < n; ++i1) {
    const double x1 = coordinate(i1);
    for (int i2 = 0; i2 < n; ++i2) {
      const double x2 = coordinate(i2);
      const double r = std::hypot(x1, x2);
      const double chi = window(r);
      const std::size_t p = static_cast<std::size_t>(i1) * n + i2;
      rot1_[p] = -chi * x2;
      rot2_[p] = chi * x1;
      core_[p] = r <= rc ? 1 : 0;
      max_w_ = std::max(max_w_, chi * r);
    }
  }

  AlignedVector<double> real(np);
  AlignedVector<Complex> cplx(ns);
  std::lock_guard lock(planner_mutex());
  forward_plan_ = fftw_plan_dft_r2c_2d(n, n, real.data(), reinterpret_cast<fftw_complex*>(cplx.data()),
                                       FFTW_ESTIMATE);
  inverse_plan_ = fftw_plan_dft_c2r_2d(n, n, reinterpret_cast<fftw_complex*>(cplx.data()), real.data(),
                                       FFTW_ESTIMATE);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) {
    throw ConfigError("FFTW planning failed for n = " + std::to_string(n));
  }
}

Grid::~Grid() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

double Grid::coordinate(int i) const noexcept {
  const int n = spec_.n;
  const int shifted = ((i + n / 2) % n) - n / 2;
  return shifted * dx_;
}

double Grid::core_radius() const noexcept {
  return spec_.window_core_fraction * std::numbers::pi * spec_.box_half_length;
}

double Grid::outer_radius() const noexcept {
  return kWindowOuterFraction * std::numbers::pi * spec_.box_half_length;
}

double Grid::window(double r) const noexcept {
  const double a = core_radius();
  const double b = outer_radius();
  return taper((r - a) / (b - a));
}

double Grid::window_moment(double r) const noexcept {
  const double a = core_radius();
  const double b = outer_radius();
  const double h = b - a;
  if (r <= a) return 0.5 * r * r;
  const double tau = std::min((r - a) / h, 1.0);
  // int_a^{a + h tau} (1 - S(t)) s ds with S the smoothstep polynomial, s = a + h t.
  static constexpr double c[5] = {126.0, -420.0, 540.0, -315.0, 70.0};
  double smooth = 0.0;
  for (int j = 0; j < 5; ++j) {
    const int p = j + 5;
    smooth += c[j] * (a * std::pow(tau, p + 1) / (p + 1) + h * std::pow(tau, p + 2) / (p + 2));
  }
  const double s_end = a + h * tau;
  return 0.5 * s_end * s_end - h * smooth;
}

GridPtr Grid::refined(int factor) const {
  GridSpec s = spec_;
  s.n *= factor;
  return make(s);
}

void Grid::execute_forward(const double* in, Complex* out) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), const_cast<double*>(in),
                       reinterpret_cast<fftw_complex*>(out));
}

void Grid::execute_inverse(Complex* in, double* out) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), reinterpret_cast<fftw_complex*>(in), out);
}

}  // namespace mhdlab
