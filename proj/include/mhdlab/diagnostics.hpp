#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "mhdlab/dynamics.hpp"
#include "mhdlab/fields.hpp"
#include "mhdlab/norms.hpp"

namespace mhdlab {

/// Share of the joint H^{2s+6} norm of (u, b) in the top third of the spectrum
/// above which a sample counts as under-resolved.
inline constexpr double kUnderResolvedShare = 0.10;

struct EnergyFunctionals {
  int s = 2;
  double sigma = 3.0 / 23.0;
  double E0 = 0.0, E1 = 0.0, e0 = 0.0, e1 = 0.0, E_total = 0.0;
  // Breakdown: sup and time-integral parts; e0 and e1 per m.
  double E0_sup = 0.0, E0_int = 0.0, E1_sup = 0.0, E1_int = 0.0;
  std::vector<double> e0_sup, e0_int;  ///< m = 0..s
  std::vector<double> e1_sup, e1_int;  ///< m = 1..s-1 (index m - 1)
  bool under_resolved = false;
  double max_top_share = 0.0;
};

/// Running sups and trapezoidal integrals over samples fed in time order.
class FunctionalAccumulator {
 public:
  FunctionalAccumulator(int s, double sigma);
  void add(const Sample& smp);
  const EnergyFunctionals& current() const noexcept { return f_; }
  std::size_t count() const noexcept { return count_; }

 private:
  struct Integrands {
    double E0 = 0.0, E1 = 0.0;
    std::vector<double> e0, e1;
  };
  Integrands integrands(const Sample& smp) const;

  EnergyFunctionals f_;
  std::size_t count_ = 0;
  double last_t_ = 0.0;
  Integrands last_;
};

/// Functionals over a whole trajectory. `s` may not exceed the order the samples
/// were recorded for; sigma must match it.
EnergyFunctionals energy_functionals(const Trajectory& traj, int s, double sigma);
double energy_E0(const Trajectory& traj, int s);
double energy_E1(const Trajectory& traj, double sigma);
double energy_e0(const Trajectory& traj, int s);
double energy_e1(const Trajectory& traj, int s);

enum class Operand { field, d_theta, time_derivative };
std::string_view to_string(Operand op);

struct NormSeries {
  std::string label;
  int order = 0;
  bool homogeneous = true;
  Operand operand = Operand::field;
  std::vector<double> times;
  std::vector<double> values;
};

/// Series of a recorded homogeneous norm of u (which = 'u') or b (which = 'b').
NormSeries norm_series(const Trajectory& traj, char which, Operand op, int order);

struct DecayFit {
  double exponent = 0.0;
  double r2 = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log(value) against log(1 + t) over samples with t >= t_min.
DecayFit decay_fit(const NormSeries& series, double t_min);

/// One CSV row per sample in the fixed column order.
struct DiagnosticsRow {
  static constexpr std::array<std::string_view, 23> kColumns{
      "t",           "L2_u",        "L2_b",         "H2_u",         "H2_b",         "Hs_top_u",
      "Hs_top_b",    "Hneg_u",      "Hneg_b",       "dtheta_H1_u",  "dtheta_H1_b",  "ut_L2",
      "bt_L2",       "energy_law_drift", "parity_err_u", "parity_err_b", "zero_mode_max", "leakage",
      "E0",          "E1",          "e0",           "e1",           "E_total"};
  std::array<double, 23> values{};
};

std::vector<DiagnosticsRow> diagnostics_table(const Trajectory& traj);

}  // namespace mhdlab
