#include "mhdlab/norms.hpp"

#include <cmath>
#include <string>

#include "mhdlab/errors.hpp"

namespace mhdlab {

namespace {

double weighted_sum(const ScalarField& f, double s, bool homogeneous) {
  const Grid& g = f.grid();
  auto c = f.coeffs();
  if (homogeneous && s < 0.0) {
    const double scale = std::max(max_coefficient(f), 1e-300);
    if (std::abs(c[0]) > 1e-12 * scale) {
      throw PreconditionError("sobolev_norm: negative homogeneous order needs a zero-mean field");
    }
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double e = std::norm(c[i]);
    if (e == 0.0) continue;
    const double ksq = g.k_squared(i);
    double w;
    if (homogeneous) {
      if (ksq == 0.0) {
        w = s == 0.0 ? 1.0 : 0.0;
      } else {
        w = s == 0.0 ? 1.0 : std::pow(ksq, s);
      }
    } else {
      w = s == 0.0 ? 1.0 : std::pow(1.0 + ksq, s);
    }
    acc += g.multiplicity(i) * w * e;
  }
  return g.area() * acc;
}

}  // namespace

double sobolev_norm(const ScalarField& f, double s, bool homogeneous) {
  return std::sqrt(weighted_sum(f, s, homogeneous));
}

double sobolev_norm(const VectorField& v, double s, bool homogeneous) {
  return std::sqrt(weighted_sum(v[0], s, homogeneous) + weighted_sum(v[1], s, homogeneous));
}

std::vector<double> homogeneous_norms_squared(const ScalarField& f, int max_order) {
  const Grid& g = f.grid();
  auto c = f.coeffs();
  std::vector<double> acc(static_cast<std::size_t>(max_order) + 1, 0.0);
  for (std::size_t i = 0; i < c.size(); ++i) {
    double e = g.multiplicity(i) * std::norm(c[i]);
    if (e == 0.0) continue;
    const double ksq = g.k_squared(i);
    acc[0] += e;
    for (int j = 1; j <= max_order; ++j) {
      e *= ksq;
      acc[j] += e;
    }
  }
  for (auto& a : acc) a *= g.area();
  return acc;
}

std::vector<double> homogeneous_norms_squared(const VectorField& v, int max_order) {
  auto a = homogeneous_norms_squared(v[0], max_order);
  const auto b = homogeneous_norms_squared(v[1], max_order);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] += b[j];
  return a;
}

std::pair<double, double> top_third_mass(const VectorField& v, double s) {
  const Grid& g = v.grid();
  const double threshold = 2.0 / 3.0 * g.dealias_radius();
  const double tsq = threshold * threshold;
  double total = 0.0;
  double top = 0.0;
  for (int c = 0; c < 2; ++c) {
    auto co = v[c].coeffs();
    for (std::size_t i = 0; i < co.size(); ++i) {
      const double e = std::norm(co[i]);
      if (e == 0.0) continue;
      const double w = g.multiplicity(i) * std::pow(1.0 + g.k_squared(i), s) * e;
      total += w;
      if (g.k_squared(i) > tsq) top += w;
    }
  }
  return {top, total};
}

double top_third_fraction(const VectorField& v, double s) {
  const auto [top, total] = top_third_mass(v, s);
  return total > 0.0 ? top / total : 0.0;
}

double binomial_combination(const std::vector<double>& hom_sq, int n, int shift) {
  if (static_cast<int>(hom_sq.size()) <= n + shift) {
    throw PreconditionError("binomial_combination: need homogeneous norms up to order " +
                            std::to_string(n + shift));
  }
  double acc = 0.0;
  double binom = 1.0;
  for (int j = 0; j <= n; ++j) {
    acc += binom * hom_sq[j + shift];
    binom = binom * (n - j) / (j + 1);
  }
  return acc;
}

}  // namespace mhdlab
