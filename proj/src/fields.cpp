#include "mhdlab/fields.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "mhdlab/errors.hpp"
#include "mhdlab/norms.hpp"

namespace mhdlab {

VectorField from_stream(const ScalarField& phi, std::optional<ParityClass> tag) {
  VectorField v{-derivative(phi, 1), derivative(phi, 0)};
  v.parity = tag;
  v.divergence_free = true;
  return v;
}

ScalarField parity_project(const ScalarField& f, int p1, int p2) {
  const Grid& g = f.grid();
  const int n = g.n();
  const int nk = g.nk();
  ScalarField out(f.grid_ptr());
  const double s1 = p1;
  const double s2 = p2;
  const double s12 = p1 * p2;
  for (int i1 = 0; i1 < n; ++i1) {
    const int r1 = (n - i1) % n;
    for (int j2 = 0; j2 < nk; ++j2) {
      const std::size_t idx = static_cast<std::size_t>(i1) * nk + j2;
      const std::size_t ref = static_cast<std::size_t>(r1) * nk + j2;
      // c(m1,-m2) = conj c(-m1,m2) and c(-m1,-m2) = conj c(m1,m2) for real fields.
      out[idx] = 0.25 * (f[idx] + s1 * f[ref] + s2 * std::conj(f[ref]) + s12 * std::conj(f[idx]));
    }
  }
  return out;
}

namespace {

struct ComponentSigns {
  int p1, p2;
};

std::array<ComponentSigns, 2> class_signs(ParityClass cls) {
  if (cls == ParityClass::velocity_like) return {ComponentSigns{-1, 1}, ComponentSigns{1, -1}};
  return {ComponentSigns{1, -1}, ComponentSigns{-1, 1}};
}

}  // namespace

VectorField parity_project(const VectorField& v, ParityClass cls) {
  require_same_grid(v[0].grid(), v[1].grid(), "parity_project");
  const auto signs = class_signs(cls);
  VectorField out{parity_project(v[0], signs[0].p1, signs[0].p2), parity_project(v[1], signs[1].p1, signs[1].p2)};
  out.parity = cls;
  out.divergence_free = v.divergence_free;
  return out;
}

double parity_error(const VectorField& v, ParityClass cls) {
  const double norm = l2_norm(v);
  if (norm == 0.0) return 0.0;
  return l2_norm(v - parity_project(v, cls)) / norm;
}

namespace {

void accumulate_mass(const ScalarField& f, double& outside, double& total) {
  const PhysicalField p = inverse_transform(f);
  const auto core = f.grid().core_mask();
  auto vals = p.values();
  for (std::size_t i = 0; i < vals.size(); ++i) {
    const double e = vals[i] * vals[i];
    total += e;
    if (!core[i]) outside += e;
  }
}

}  // namespace

double support_leakage(const ScalarField& f) {
  double outside = 0.0;
  double total = 0.0;
  accumulate_mass(f, outside, total);
  return total > 0.0 ? outside / total : 0.0;
}

double support_leakage(const VectorField& v) {
  double outside = 0.0;
  double total = 0.0;
  accumulate_mass(v[0], outside, total);
  accumulate_mass(v[1], outside, total);
  return total > 0.0 ? outside / total : 0.0;
}

ScalarField d_theta_unchecked(const ScalarField& f) {
  const Grid& g = f.grid();
  PhysicalField a = inverse_transform(derivative(f, 0));
  const PhysicalField b = inverse_transform(derivative(f, 1));
  const auto r1 = g.rotation_x1();
  const auto r2 = g.rotation_x2();
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t p = 0; p < av.size(); ++p) av[p] = r1[p] * av[p] + r2[p] * bv[p];
  ScalarField out = forward_transform(a);
  dealias_in_place(out);
  return out;
}

VectorField d_theta_unchecked(const VectorField& v) {
  VectorField out{d_theta_unchecked(v[0]), d_theta_unchecked(v[1])};
  // Each reflection flips the sign of d_theta, which swaps the parity class.
  if (v.parity) out.parity = opposite(*v.parity);
  return out;
}

namespace {

template <typename T>
Flagged<T> checked_theta(const T& f, const ThetaCheck& check) {
  const double leak = support_leakage(f);
  if (leak > check.hard_threshold) {
    throw TruncationError("d_theta: input leaks outside the window core (leakage " + std::to_string(leak) + ")");
  }
  return Flagged<T>{d_theta_unchecked(f), leak > check.soft_threshold, leak};
}

}  // namespace

ScalarField d_theta(const ScalarField& f, const ThetaCheck& check) { return checked_theta(f, check).value; }
VectorField d_theta(const VectorField& v, const ThetaCheck& check) { return checked_theta(v, check).value; }
Flagged<ScalarField> d_theta_flagged(const ScalarField& f, const ThetaCheck& check) {
  return checked_theta(f, check);
}
Flagged<VectorField> d_theta_flagged(const VectorField& v, const ThetaCheck& check) {
  return checked_theta(v, check);
}

// ---------------------------------------------------------------------------

double SmallnessNorm::evaluate(const VectorField& v) const {
  return sobolev_norm(v, -sigma, true) + sobolev_norm(v, 2.0 * s + 6.0, false);
}

namespace {

double spectral_weight(const Envelope& env, double k) {
  if (env.law == SpectralLaw::gaussian) return std::exp(-(k / env.k0) * (k / env.k0));
  return std::pow(1.0 + k / env.k0, -env.exponent);
}

void check_envelope(const Envelope& env) {
  if (!(env.k0 > 0.0) || !(env.radius > 0.0) || !(env.carrier_spacing > 0.0) || !(env.carrier_cutoff > 0.0)) {
    throw ConfigError("envelope: k0, radius, carrier_spacing and carrier_cutoff must be > 0");
  }
  if (env.law == SpectralLaw::power && !(env.exponent > 0.0)) {
    throw ConfigError("envelope: power-law exponent must be > 0");
  }
}

int carrier_count(const Envelope& env) {
  return std::max(1, static_cast<int>(std::floor(env.carrier_cutoff * env.k0 / env.carrier_spacing)));
}

// Physical envelope: Gaussian confinement times the window taper.
PhysicalField confine(const PhysicalField& f, const Envelope& env) {
  const Grid& g = f.grid();
  PhysicalField out = f;
  const int n = g.n();
  for (int i1 = 0; i1 < n; ++i1) {
    const double x1 = g.coordinate(i1);
    for (int i2 = 0; i2 < n; ++i2) {
      const double x2 = g.coordinate(i2);
      const double r = std::hypot(x1, x2);
      out[static_cast<std::size_t>(i1) * n + i2] *= g.window(r) * std::exp(-(r / env.radius) * (r / env.radius));
    }
  }
  return out;
}

}  // namespace

VectorField random_symmetric_field(GridPtr grid, std::uint64_t seed, const Envelope& env, ParityClass cls,
                                   double amplitude, const SmallnessNorm& norm) {
  if (!(amplitude > 0.0)) throw PreconditionError("random_symmetric_field: amplitude must be > 0");
  check_envelope(env);
  const int n = grid->n();
  const int M = carrier_count(env);
  const bool odd = cls == ParityClass::velocity_like;
  const int a0 = odd ? 1 : 0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  // coef[a][b] for carriers (kappa a, kappa b), a, b in [a0, M].
  std::vector<std::vector<double>> coef(M + 1, std::vector<double>(M + 1, 0.0));
  for (int a = a0; a <= M; ++a) {
    for (int b = a0; b <= M; ++b) {
      const double z = normal(rng);
      const double k = env.carrier_spacing * std::hypot(a, b);
      if (k <= env.carrier_cutoff * env.k0) coef[a][b] = z * spectral_weight(env, k);
    }
  }

  // Separable evaluation: psi(x1, x2) = sum_a s_a(x1) * (sum_b coef[a][b] s_b(x2)).
  auto basis = [&](int a, double x) {
    const double arg = env.carrier_spacing * a * x;
    return odd ? std::sin(arg) : std::cos(arg);
  };
  std::vector<std::vector<double>> table(M + 1, std::vector<double>(n));
  for (int a = a0; a <= M; ++a) {
    for (int i = 0; i < n; ++i) table[a][i] = basis(a, grid->coordinate(i));
  }
  std::vector<std::vector<double>> inner_sum(M + 1, std::vector<double>(n, 0.0));
  for (int a = a0; a <= M; ++a) {
    for (int b = a0; b <= M; ++b) {
      if (coef[a][b] == 0.0) continue;
      for (int i = 0; i < n; ++i) inner_sum[a][i] += coef[a][b] * table[b][i];
    }
  }
  PhysicalField psi(grid);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      double acc = 0.0;
      for (int a = a0; a <= M; ++a) acc += table[a][i1] * inner_sum[a][i2];
      psi[static_cast<std::size_t>(i1) * n + i2] = acc;
    }
  }
  if (env.remove_radial_mode && !odd) {
    // The circle average of cos(p x1) cos(q x2) is J0(r |(p, q)|); sine carriers average to zero.
    std::map<int, double> by_norm;  // a^2 + b^2 -> summed coefficient
    for (int a = a0; a <= M; ++a) {
      for (int b = a0; b <= M; ++b) {
        if (coef[a][b] != 0.0) by_norm[a * a + b * b] += coef[a][b];
      }
    }
    std::vector<std::pair<double, double>> radial;  // (|k|, coefficient)
    for (const auto& [q, c] : by_norm) radial.emplace_back(env.carrier_spacing * std::sqrt(q), c);
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = 0; i2 < n; ++i2) {
        const double r = std::hypot(grid->coordinate(i1), grid->coordinate(i2));
        double mean = 0.0;
        for (const auto& [k, c] : radial) mean += c * std::cyl_bessel_j(0.0, k * r);
        psi[static_cast<std::size_t>(i1) * n + i2] -= mean;
      }
    }
  }

  ScalarField stream = forward_transform(confine(psi, env));
  dealias_in_place(stream);
  stream = odd ? parity_project(stream, -1, -1) : parity_project(stream, 1, 1);
  stream[0] = 0.0;
  VectorField v = parity_project(from_stream(stream), cls);
  v.divergence_free = true;

  const double size = norm.evaluate(v);
  if (!(size > 0.0)) throw NumericalError("random_symmetric_field: generated field vanishes on this grid");
  v *= amplitude / size;
  return v;
}

ScalarField random_smooth_scalar(GridPtr grid, std::uint64_t seed, const Envelope& env) {
  check_envelope(env);
  const int n = grid->n();
  const int M = carrier_count(env);
  const int W = 2 * M + 1;  // a in [-M, M]
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  // cos(ka x1 + kb x2 + phi) = cos(ka x1) cos(kb x2 + phi) - sin(ka x1) sin(kb x2 + phi)
  std::vector<std::vector<double>> csum(W, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> ssum(W, std::vector<double>(n, 0.0));
  for (int a = -M; a <= M; ++a) {
    for (int b = 0; b <= M; ++b) {
      const double z = normal(rng);
      const double ph = phase(rng);
      const double k = env.carrier_spacing * std::hypot(a, b);
      if (k > env.carrier_cutoff * env.k0) continue;
      const double w = z * spectral_weight(env, k);
      for (int i = 0; i < n; ++i) {
        const double arg = env.carrier_spacing * b * grid->coordinate(i) + ph;
        csum[a + M][i] += w * std::cos(arg);
        ssum[a + M][i] += w * std::sin(arg);
      }
    }
  }
  std::vector<std::vector<double>> ca(W, std::vector<double>(n));
  std::vector<std::vector<double>> sa(W, std::vector<double>(n));
  for (int a = -M; a <= M; ++a) {
    for (int i = 0; i < n; ++i) {
      const double arg = env.carrier_spacing * a * grid->coordinate(i);
      ca[a + M][i] = std::cos(arg);
      sa[a + M][i] = std::sin(arg);
    }
  }
  PhysicalField f(grid);
  for (int i1 = 0; i1 < n; ++i1) {
    for (int i2 = 0; i2 < n; ++i2) {
      double acc = 0.0;
      for (int a = 0; a < W; ++a) acc += ca[a][i1] * csum[a][i2] - sa[a][i1] * ssum[a][i2];
      f[static_cast<std::size_t>(i1) * n + i2] = acc;
    }
  }
  ScalarField out = forward_transform(confine(f, env));
  dealias_in_place(out);
  const double norm = l2_norm(out);
  if (!(norm > 0.0)) throw NumericalError("random_smooth_scalar: generated field vanishes on this grid");
  out *= 1.0 / norm;
  return out;
}

// ---------------------------------------------------------------------------

CircleAverager::CircleAverager(GridPtr grid, std::vector<double> radii, int points)
    : grid_(std::move(grid)), radii_(std::move(radii)) {
  if (points < 4 || points % 4 != 0) throw PreconditionError("CircleAverager: points must be a positive multiple of 4");
  const Grid& g = *grid_;
  for (double r : radii_) {
    if (!(r >= 0.0) || r > g.core_radius()) {
      throw PreconditionError("zero_angular_mode: radius " + std::to_string(r) + " lies outside the core (" +
                              std::to_string(g.core_radius()) + ")");
    }
  }
  const int n = g.n();
  const int nk = g.nk();
  const double L = g.box_half_length();
  weights_.assign(radii_.size(), std::vector<double>(g.spectral_size(), 0.0));
  std::vector<double> c1(static_cast<std::size_t>(n)), s1(static_cast<std::size_t>(n));
  std::vector<double> c2(static_cast<std::size_t>(nk)), s2(static_cast<std::size_t>(nk));
  for (std::size_t ir = 0; ir < radii_.size(); ++ir) {
    auto& w = weights_[ir];
    for (int p = 0; p < points; ++p) {
      const double th = 2.0 * std::numbers::pi * p / points;
      const double x1 = radii_[ir] * std::cos(th);
      const double x2 = radii_[ir] * std::sin(th);
      for (int i1 = 0; i1 < n; ++i1) {
        const double arg = g.signed_mode(i1) / L * x1;
        c1[i1] = std::cos(arg);
        s1[i1] = std::sin(arg);
      }
      for (int j2 = 0; j2 < nk; ++j2) {
        const double arg = j2 / L * x2;
        c2[j2] = std::cos(arg);
        s2[j2] = std::sin(arg);
      }
      for (int i1 = 0; i1 < n; ++i1) {
        double* row = w.data() + static_cast<std::size_t>(i1) * nk;
        for (int j2 = 0; j2 < nk; ++j2) row[j2] += c1[i1] * c2[j2] - s1[i1] * s2[j2];
      }
    }
    for (std::size_t idx = 0; idx < w.size(); ++idx) w[idx] *= g.multiplicity(idx) / points;
  }
}

std::vector<double> CircleAverager::averages(const ScalarField& f) const {
  require_same_grid(*grid_, f.grid(), "CircleAverager");
  // The point set is symmetric under x -> -x, so the imaginary parts cancel.
  std::vector<double> out(radii_.size());
  auto c = f.coeffs();
  for (std::size_t ir = 0; ir < radii_.size(); ++ir) {
    const auto& w = weights_[ir];
    double acc = 0.0;
    for (std::size_t idx = 0; idx < c.size(); ++idx) acc += w[idx] * c[idx].real();
    out[ir] = acc;
  }
  return out;
}

std::vector<double> zero_angular_mode(const VectorField& v, const std::vector<double>& radii) {
  const CircleAverager avg(v.grid_ptr(), radii);
  const auto a = avg.averages(v[0]);
  const auto b = avg.averages(v[1]);
  std::vector<double> out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) out[i] = std::max(std::abs(a[i]), std::abs(b[i]));
  return out;
}

std::vector<double> core_radii(const Grid& grid, int count) {
  std::vector<double> r(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) r[i] = grid.core_radius() * (i + 1) / (count + 1);
  return r;
}

// ---------------------------------------------------------------------------

BackgroundField::BackgroundField(GridPtr g) : grid(std::move(g)) {
  // (chi x2, -chi x1) = grad^perp psi with psi(r) = -int_0^r chi(s) s ds, which keeps
  // the spectral representation exactly divergence-free.
  const Grid& gr = *grid;
  auto psi = PhysicalField::sample(grid, [&gr](double x1, double x2) { return -gr.window_moment(std::hypot(x1, x2)); });
  ScalarField stream = forward_transform(psi);
  stream[0] = 0.0;
  field = from_stream(stream);
}

VectorField full_from_perturbation(const VectorField& b, const BackgroundField& bg) {
  VectorField out = bg.field + b;
  out.divergence_free = b.divergence_free;
  return out;
}

VectorField perturbation_from_full(const VectorField& B, const BackgroundField& bg) {
  VectorField out = B - bg.field;
  out.divergence_free = B.divergence_free;
  return out;
}

double max_abs(const ScalarField& f) {
  const PhysicalField p = inverse_transform(f);
  double m = 0.0;
  for (double x : p.values()) m = std::max(m, std::abs(x));
  return m;
}

double max_abs(const VectorField& v) { return std::max(max_abs(v[0]), max_abs(v[1])); }

}  // namespace mhdlab
