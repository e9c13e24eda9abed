#include "mhdlab/inequality.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mhdlab/errors.hpp"
#include "mhdlab/norms.hpp"

namespace mhdlab {

Ratio make_ratio(double lhs, double rhs) {
  Ratio r{lhs, rhs, 0.0, false};
  if (lhs == 0.0) return r;
  if (rhs <= 1e-12 * lhs) {
    r.value = std::numeric_limits<double>::infinity();
    r.violation = true;
    return r;
  }
  r.value = lhs / rhs;
  return r;
}

Ratio poincare_ratio(const VectorField& v, int k, ParityClass cls, bool require_class) {
  if (k < 0) throw PreconditionError("poincare_ratio: k must be >= 0");
  if (require_class && parity_error(v, cls) > 1e-8) {
    throw PreconditionError("poincare_ratio: field is not in the " + std::string(to_string(cls)) +
                            " class; the estimate needs the reflection symmetry");
  }
  const double lhs = sobolev_norm(v, k, false);
  if (lhs == 0.0) return {};
  const double rhs = sobolev_norm(d_theta(v), k, false);
  return make_ratio(lhs, rhs);
}

namespace {

// Twice-as-fine grid on which products of dealiased fields are exact.
struct Fine {
  GridPtr grid;
  explicit Fine(const Grid& g) : grid(g.refined(2)) {}
  PhysicalField physical(const ScalarField& f) const { return inverse_transform(prolong(f, grid)); }
  ScalarField lift(const ScalarField& f) const { return prolong(f, grid); }
};

ScalarField iterated_derivative(ScalarField f, int a1, int a2) {
  for (int i = 0; i < a1; ++i) f = derivative(f, 0);
  for (int i = 0; i < a2; ++i) f = derivative(f, 1);
  return f;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double sup_abs(const PhysicalField& p) {
  double m = 0.0;
  for (double x : p.values()) m = std::max(m, std::abs(x));
  return m;
}

double sup_gradient(const Fine& fine, const ScalarField& f) {
  const PhysicalField d1 = fine.physical(derivative(f, 0));
  const PhysicalField d2 = fine.physical(derivative(f, 1));
  double m = 0.0;
  for (std::size_t p = 0; p < d1.values().size(); ++p) m = std::max(m, std::hypot(d1[p], d2[p]));
  return m;
}

double l2_on_grid(const PhysicalField& p) {
  double s = 0.0;
  for (double x : p.values()) s += x * x;
  return std::sqrt(s * p.grid().cell_area());
}

PhysicalField pointwise(const PhysicalField& a, const PhysicalField& b) {
  PhysicalField out(a.grid_ptr());
  for (std::size_t p = 0; p < a.values().size(); ++p) out[p] = a[p] * b[p];
  return out;
}

}  // namespace

Ratio product_estimate_ratio(const ScalarField& f, const ScalarField& g, int k) {
  if (k < 0 || k > 4) throw PreconditionError("product_estimate_ratio: k must lie in [0, 4]");
  require_same_grid(f.grid(), g.grid(), "product_estimate_ratio");
  const Fine fine(f.grid());
  const PhysicalField F = fine.physical(dealias(f));
  const PhysicalField G = fine.physical(dealias(g));
  const ScalarField fg = forward_transform(pointwise(F, G));
  // Sum over ordered index tuples: multi-index (a, k - a) appears C(k, a) times.
  double lhs2 = 0.0;
  for (int a = 0; a <= k; ++a) {
    const double d = l2_norm(iterated_derivative(fg, a, k - a));
    lhs2 += binomial(k, a) * d * d;
  }
  const double rhs = sup_abs(F) * sobolev_norm(g, k, false) + sobolev_norm(f, k, false) * sup_abs(G);
  return make_ratio(std::sqrt(lhs2), rhs);
}

Ratio commutator_estimate_ratio(const ScalarField& f, const ScalarField& g, int k) {
  if (k < 1 || k > 4) throw PreconditionError("commutator_estimate_ratio: k must lie in [1, 4]");
  require_same_grid(f.grid(), g.grid(), "commutator_estimate_ratio");
  const Fine fine(f.grid());
  const PhysicalField F = fine.physical(dealias(f));
  const PhysicalField G = fine.physical(dealias(g));
  const ScalarField fg = forward_transform(pointwise(F, G));
  const ScalarField g_fine = fine.lift(dealias(g));
  double lhs2 = 0.0;
  for (int a = 0; a <= k; ++a) {
    PhysicalField c = inverse_transform(iterated_derivative(fg, a, k - a));
    const PhysicalField fdg = pointwise(F, inverse_transform(iterated_derivative(g_fine, a, k - a)));
    for (std::size_t p = 0; p < c.values().size(); ++p) c[p] -= fdg[p];
    const double d = l2_on_grid(c);
    lhs2 += binomial(k, a) * d * d;
  }
  const double rhs =
      sup_gradient(fine, dealias(f)) * sobolev_norm(g, k - 1, false) + sobolev_norm(f, k - 1, false) * sup_abs(G);
  return make_ratio(std::sqrt(lhs2), rhs);
}

// ---------------------------------------------------------------------------

const std::vector<GnPreset>& gn_registry() {
  static const std::vector<GnPreset> registry{
      {"grad_linf", "|grad u|_Linf <~ |grad u|_L2^(1/2) |grad^3 u|_L2^(1/2)",
       "time integrability of the velocity gradient", false, false},
      {"l2_neg_h1", "|u|_L2 <= |u|_Hdot^-sigma^(1/(1+sigma)) |u|_Hdot^1^(sigma/(1+sigma))",
       "negative-index energy, velocity nonlinearity", true, false},
      {"lp_neg_h1", "|u|_Lp <~ |u|_Hdot^-sigma^(2/(p(1+sigma))) |u|_Hdot^1^(1-2/(p(1+sigma))), p = 2/sigma",
       "negative-index energy, velocity nonlinearity", true, false},
      {"lp_embed", "|u|_Lp <~ |u|_Hdot^(1-sigma), p = 2/sigma", "negative-index energy, magnetic nonlinearity",
       false, false},
      {"h1ms_neg_h1", "|b|_Hdot^(1-sigma) <= |b|_Hdot^-sigma^(sigma/(1+sigma)) |b|_Hdot^1^(1/(1+sigma))",
       "negative-index energy, magnetic nonlinearity", true, false},
      {"hdot_mid_2", "|f|_Hdot^2 <= |f|_Hdot^1^(1/2) |f|_Hdot^3^(1/2)",
       "time-weighted energy, linear terms (m = 1)", false, false},
      {"hdot_mid_4", "|f|_Hdot^4 <= |f|_Hdot^3^(1/2) |f|_Hdot^5^(1/2)",
       "time-weighted energy, third linear term (m = 1)", false, false},
      {"linf_neg_h3", "|b|_Linf <~ |b|_Hdot^-sigma^(2/(3+sigma)) |b|_Hdot^3^((1+sigma)/(3+sigma))",
       "time-weighted energy, the weakest-decay magnetic term", true, false},
      {"h3_theta_h4", "|b|_Hdot^3 <~ |d_theta b|_Hdot^2^(1/2) |b|_Hdot^4^(1/2)",
       "time-weighted energy, trading b for d_theta b", false, true},
  };
  return registry;
}

const GnPreset& gn_preset(std::string_view id) {
  for (const auto& p : gn_registry()) {
    if (p.id == id) return p;
  }
  throw PreconditionError("unknown interpolation preset '" + std::string(id) + "'");
}

namespace {

double hdot(const VectorField& v, double s) { return sobolev_norm(v, s, true); }

double lp_norm(const Fine& fine, const VectorField& v, double p) {
  const PhysicalField a = fine.physical(v[0]);
  const PhysicalField b = fine.physical(v[1]);
  double s = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) s += std::pow(std::hypot(a[i], b[i]), p);
  return std::pow(s * fine.grid->cell_area(), 1.0 / p);
}

double sup_norm(const Fine& fine, const VectorField& v) {
  const PhysicalField a = fine.physical(v[0]);
  const PhysicalField b = fine.physical(v[1]);
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::hypot(a[i], b[i]));
  return m;
}

double sup_gradient_tensor(const Fine& fine, const VectorField& v) {
  std::array<PhysicalField, 4> d{fine.physical(derivative(v[0], 0)), fine.physical(derivative(v[0], 1)),
                                 fine.physical(derivative(v[1], 0)), fine.physical(derivative(v[1], 1))};
  double m = 0.0;
  for (std::size_t i = 0; i < d[0].values().size(); ++i) {
    m = std::max(m, std::sqrt(d[0][i] * d[0][i] + d[1][i] * d[1][i] + d[2][i] * d[2][i] + d[3][i] * d[3][i]));
  }
  return m;
}

}  // namespace

Ratio gn_interpolation_ratio(const VectorField& v, std::string_view id, double sigma) {
  const GnPreset& preset = gn_preset(id);
  if (!(sigma > 0.0 && sigma < 1.0)) throw PreconditionError("gn_interpolation_ratio: sigma must lie in (0, 1)");
  if (preset.needs_zero_mean) {
    const double mean = std::abs(v[0][0]) + std::abs(v[1][0]);
    if (mean > 1e-12 * (max_coefficient(v[0]) + max_coefficient(v[1]) + 1e-300)) {
      throw PreconditionError("preset '" + preset.id + "' needs a field with zero mean");
    }
  }
  if (preset.needs_class && !v.parity) {
    throw PreconditionError("preset '" + preset.id + "' needs a field tagged with its parity class");
  }
  if (max_coefficient(v[0]) == 0.0 && max_coefficient(v[1]) == 0.0) return {};
  const Fine fine(v.grid());
  const double p = 2.0 / sigma;
  double lhs = 0.0, rhs = 0.0;
  if (id == "grad_linf") {
    lhs = sup_gradient_tensor(fine, v);
    rhs = std::sqrt(hdot(v, 1) * hdot(v, 3));
  } else if (id == "l2_neg_h1") {
    lhs = l2_norm(v);
    rhs = std::pow(hdot(v, -sigma), 1.0 / (1.0 + sigma)) * std::pow(hdot(v, 1), sigma / (1.0 + sigma));
  } else if (id == "lp_neg_h1") {
    const double a = 2.0 / (p * (1.0 + sigma));
    lhs = lp_norm(fine, v, p);
    rhs = std::pow(hdot(v, -sigma), a) * std::pow(hdot(v, 1), 1.0 - a);
  } else if (id == "lp_embed") {
    lhs = lp_norm(fine, v, p);
    rhs = hdot(v, 1.0 - sigma);
  } else if (id == "h1ms_neg_h1") {
    lhs = hdot(v, 1.0 - sigma);
    rhs = std::pow(hdot(v, -sigma), sigma / (1.0 + sigma)) * std::pow(hdot(v, 1), 1.0 / (1.0 + sigma));
  } else if (id == "hdot_mid_2") {
    lhs = hdot(v, 2);
    rhs = std::sqrt(hdot(v, 1) * hdot(v, 3));
  } else if (id == "hdot_mid_4") {
    lhs = hdot(v, 4);
    rhs = std::sqrt(hdot(v, 3) * hdot(v, 5));
  } else if (id == "linf_neg_h3") {
    lhs = sup_norm(fine, v);
    rhs = std::pow(hdot(v, -sigma), 2.0 / (3.0 + sigma)) * std::pow(hdot(v, 3), (1.0 + sigma) / (3.0 + sigma));
  } else if (id == "h3_theta_h4") {
    lhs = hdot(v, 3);
    rhs = std::sqrt(hdot(d_theta(v), 2) * hdot(v, 4));
  }
  return make_ratio(lhs, rhs);
}

// ---------------------------------------------------------------------------

std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + (index + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

enum class Kind { poincare, product, commutator, gn };

struct Parsed {
  Kind kind;
  int k = 0;
  std::string preset;
};

Parsed parse_inequality(const std::string& id) {
  const auto colon = id.find(':');
  if (colon == std::string::npos) throw ConfigError("inequality id '" + id + "' must look like NAME:ARG");
  const std::string name = id.substr(0, colon);
  const std::string arg = id.substr(colon + 1);
  Parsed p{};
  if (name == "gn") {
    gn_preset(arg);
    p.kind = Kind::gn;
    p.preset = arg;
    return p;
  }
  int k = -1;
  const auto [ptr, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), k);
  if (ec != std::errc{} || ptr != arg.data() + arg.size()) throw ConfigError("inequality id '" + id + "': bad order");
  if (name == "poincare") {
    if (k < 0) throw ConfigError("poincare order must be >= 0");
    p.kind = Kind::poincare;
  } else if (name == "product") {
    if (k < 0 || k > 4) throw ConfigError("product order must lie in [0, 4]");
    p.kind = Kind::product;
  } else if (name == "commutator") {
    if (k < 1 || k > 4) throw ConfigError("commutator order must lie in [1, 4]");
    p.kind = Kind::commutator;
  } else {
    throw ConfigError("unknown inequality '" + name + "'");
  }
  p.k = k;
  return p;
}

}  // namespace

InequalityReport ensemble_survey(const SurveySpec& spec) {
  if (spec.trials < 0) throw ConfigError("survey trials must be >= 0");
  if (spec.threads < 1) throw ConfigError("survey threads must be >= 1");
  const Parsed what = parse_inequality(spec.inequality);
  InequalityReport rep;
  rep.inequality_id = spec.inequality;
  rep.trials = spec.trials;
  rep.seed = spec.seed;
  rep.n = spec.grid.n;
  if (spec.trials == 0) return rep;
  const GridPtr grid = Grid::make(spec.grid);

  std::vector<Ratio> results(spec.trials);
  auto trial = [&](int i) {
    const std::uint64_t s = trial_seed(spec.seed, static_cast<std::uint64_t>(i));
    switch (what.kind) {
      case Kind::poincare:
        return poincare_ratio(random_symmetric_field(grid, s, spec.envelope, spec.cls, 1.0), what.k, spec.cls);
      case Kind::product:
        return product_estimate_ratio(random_smooth_scalar(grid, s, spec.envelope),
                                      random_smooth_scalar(grid, trial_seed(s, 1), spec.envelope), what.k);
      case Kind::commutator:
        return commutator_estimate_ratio(random_smooth_scalar(grid, s, spec.envelope),
                                         random_smooth_scalar(grid, trial_seed(s, 1), spec.envelope), what.k);
      case Kind::gn:
        return gn_interpolation_ratio(random_symmetric_field(grid, s, spec.envelope, spec.cls, 1.0), what.preset);
    }
    return Ratio{};
  };

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int i = next++; i < spec.trials; i = next++) {
      try {
        results[i] = trial(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int nthreads = std::min(spec.threads, spec.trials);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (const auto& r : results) {
    rep.ratios.push_back(r.value);
    if (r.violation) ++rep.violations;
  }
  std::vector<double> sorted = rep.ratios;
  std::sort(sorted.begin(), sorted.end());
  rep.max_ratio = sorted.back();
  const std::size_t m = sorted.size() / 2;
  rep.median_ratio = sorted.size() % 2 ? sorted[m] : 0.5 * (sorted[m - 1] + sorted[m]);
  return rep;
}

namespace {

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string report_json(const InequalityReport& r) {
  nlohmann::ordered_json j;
  j["inequality_id"] = r.inequality_id;
  j["trials"] = r.trials;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["max_ratio"] = r.max_ratio;
  j["median_ratio"] = r.median_ratio;
  j["violations"] = r.violations;
  j["ratios"] = r.ratios;
  if (r.inequality_id.rfind("gn:", 0) == 0) {
    const auto& p = gn_preset(r.inequality_id.substr(3));
    j["statement"] = p.statement;
    j["role"] = p.role;
  }
  return j.dump(2) + "\n";
}

std::string report_csv(const InequalityReport& r) {
  std::ostringstream out;
  out << "trial,ratio\n";
  for (std::size_t i = 0; i < r.ratios.size(); ++i) out << i << ',' << g17(r.ratios[i]) << '\n';
  return out.str();
}

}  // namespace mhdlab
