#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mhdlab/fields.hpp"

namespace mhdlab {

/// LHS / RHS of one inequality instance. 0/0 counts as 0; x/0 with x > 0 (RHS
/// below 1e-12 * LHS) is a violation with an infinite ratio.
struct Ratio {
  double lhs = 0.0;
  double rhs = 0.0;
  double value = 0.0;
  bool violation = false;
};

Ratio make_ratio(double lhs, double rhs);

/// |v|_{H^k} / |d_theta v|_{H^k}. With `require_class` the field must lie in `cls`
/// (parity error < 1e-8); pass false to probe fields outside the hypothesis.
Ratio poincare_ratio(const VectorField& v, int k, ParityClass cls, bool require_class = true);

/// |grad^k (f g)|_{L2} / (|f|_Linf |g|_{H^k} + |f|_{H^k} |g|_Linf), with grad^k the
/// full tensor of iterated coordinate derivatives. Inputs are dealiased and their
/// products formed on a grid twice as fine, where they are exact. 0 <= k <= 4.
Ratio product_estimate_ratio(const ScalarField& f, const ScalarField& g, int k);

/// |grad^k (f g) - f grad^k g|_{L2} / (|grad f|_Linf |g|_{H^{k-1}} + |f|_{H^{k-1}} |g|_Linf),
/// 1 <= k <= 4.
Ratio commutator_estimate_ratio(const ScalarField& f, const ScalarField& g, int k);

/// Interpolation and embedding inequalities used by the energy estimates.
struct GnPreset {
  std::string id;
  std::string statement;  ///< the inequality in plain text
  std::string role;       ///< where it enters the estimates
  bool needs_zero_mean = false;
  bool needs_class = false;
};

const std::vector<GnPreset>& gn_registry();
const GnPreset& gn_preset(std::string_view id);

/// LHS / RHS of a registry inequality for the field v, with sigma for presets that
/// involve the negative index.
Ratio gn_interpolation_ratio(const VectorField& v, std::string_view preset, double sigma = 3.0 / 23.0);

struct InequalityReport {
  std::string inequality_id;
  int trials = 0;
  std::uint64_t seed = 0;
  int n = 0;
  std::vector<double> ratios;
  double max_ratio = 0.0;
  double median_ratio = 0.0;
  int violations = 0;
};

struct SurveySpec {
  /// "poincare:K", "product:K", "commutator:K" or "gn:PRESET".
  std::string inequality;
  GridSpec grid{};
  Envelope envelope{};
  ParityClass cls = ParityClass::velocity_like;
  int trials = 100;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Per-trial seeds for a master seed (splitmix64 of master + index).
std::uint64_t trial_seed(std::uint64_t master, std::uint64_t index);

/// Runs the trials (in parallel up to spec.threads); the result does not depend
/// on the thread count.
InequalityReport ensemble_survey(const SurveySpec& spec);

std::string report_json(const InequalityReport& r);
std::string report_csv(const InequalityReport& r);

}  // namespace mhdlab
