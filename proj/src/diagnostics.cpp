#include "mhdlab/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "mhdlab/errors.hpp"

namespace mhdlab {

FunctionalAccumulator::FunctionalAccumulator(int s, double sigma) {
  if (s < 1) throw PreconditionError("functionals: s must be >= 1");
  f_.s = s;
  f_.sigma = sigma;
  f_.e0_sup.assign(s + 1, 0.0);
  f_.e0_int.assign(s + 1, 0.0);
  f_.e1_sup.assign(std::max(s - 1, 0), 0.0);
  f_.e1_int.assign(std::max(s - 1, 0), 0.0);
}

FunctionalAccumulator::Integrands FunctionalAccumulator::integrands(const Sample& smp) const {
  const int s = f_.s;
  const int top = 2 * s + 6;
  if (static_cast<int>(smp.u_hom.size()) < top + 2 || static_cast<int>(smp.ut_hom.size()) < 2 * s + 2) {
    throw PreconditionError("functionals: samples were recorded for a smaller s");
  }
  Integrands in;
  in.E0 = binomial_combination(smp.u_hom, top, 1);
  in.E1 = smp.u_one_minus;
  in.e0.resize(s + 1);
  for (int m = 0; m <= s; ++m) {
    const int o = 2 * m + 1;
    in.e0[m] = smp.ut_hom[o] + smp.bt_hom[o] + smp.dtu_hom[o] + smp.dtb_hom[o];
  }
  const double w = (1.0 + smp.t) * (1.0 + smp.t);
  in.e1.resize(std::max(s - 1, 0));
  for (int m = 1; m <= s - 1; ++m) in.e1[m - 1] = w * in.e0[m];
  return in;
}

void FunctionalAccumulator::add(const Sample& smp) {
  if (count_ > 0 && !(smp.t > last_t_)) throw PreconditionError("functionals: sample times must increase");
  const int s = f_.s;
  const int top = 2 * s + 6;
  Integrands in = integrands(smp);

  f_.E0_sup = std::max(f_.E0_sup, binomial_combination(smp.u_hom, top) + binomial_combination(smp.b_hom, top));
  f_.E1_sup = std::max(f_.E1_sup, smp.u_neg + smp.b_neg);
  const double w = (1.0 + smp.t) * (1.0 + smp.t);
  for (int m = 0; m <= s; ++m) {
    const int o = 2 * m;
    const double term = smp.ut_hom[o] + smp.bt_hom[o] + smp.dtu_hom[o] + smp.dtb_hom[o] + smp.u_hom[o + 2] +
                        smp.b_hom[o + 2];
    f_.e0_sup[m] = std::max(f_.e0_sup[m], term);
    if (m >= 1 && m <= s - 1) f_.e1_sup[m - 1] = std::max(f_.e1_sup[m - 1], w * term);
  }
  if (count_ > 0) {
    const double h = 0.5 * (smp.t - last_t_);
    f_.E0_int += h * (last_.E0 + in.E0);
    f_.E1_int += h * (last_.E1 + in.E1);
    for (int m = 0; m <= s; ++m) f_.e0_int[m] += h * (last_.e0[m] + in.e0[m]);
    for (int m = 1; m <= s - 1; ++m) f_.e1_int[m - 1] += h * (last_.e1[m - 1] + in.e1[m - 1]);
  }
  f_.max_top_share = std::max(f_.max_top_share, smp.top_joint);
  f_.under_resolved = f_.max_top_share > kUnderResolvedShare;

  f_.E0 = f_.E0_sup + f_.E0_int;
  f_.E1 = f_.E1_sup + f_.E1_int;
  f_.e0 = 0.0;
  for (int m = 0; m <= s; ++m) f_.e0 += f_.e0_sup[m] + f_.e0_int[m];
  f_.e1 = 0.0;
  for (int m = 1; m <= s - 1; ++m) f_.e1 += f_.e1_sup[m - 1] + f_.e1_int[m - 1];
  f_.E_total = f_.E0 + f_.E1 + f_.e0 + f_.e1;

  last_ = std::move(in);
  last_t_ = smp.t;
  ++count_;
}

EnergyFunctionals energy_functionals(const Trajectory& traj, int s, double sigma) {
  if (s > traj.norms.s) throw PreconditionError("functionals: trajectory was recorded for s = " + std::to_string(traj.norms.s));
  if (std::abs(sigma - traj.norms.sigma) > 1e-15) {
    throw PreconditionError("functionals: trajectory was recorded for a different sigma");
  }
  FunctionalAccumulator acc(s, sigma);
  for (const auto& smp : traj.samples) acc.add(smp);
  return acc.current();
}

double energy_E0(const Trajectory& traj, int s) { return energy_functionals(traj, s, traj.norms.sigma).E0; }
double energy_E1(const Trajectory& traj, double sigma) { return energy_functionals(traj, 1, sigma).E1; }
double energy_e0(const Trajectory& traj, int s) { return energy_functionals(traj, s, traj.norms.sigma).e0; }
double energy_e1(const Trajectory& traj, int s) {
  if (s < 2) throw PreconditionError("energy_e1: the sum over m = 1..s-1 is empty for s < 2");
  return energy_functionals(traj, s, traj.norms.sigma).e1;
}

std::string_view to_string(Operand op) {
  switch (op) {
    case Operand::field: return "field";
    case Operand::d_theta: return "d_theta";
    case Operand::time_derivative: return "time_derivative";
  }
  return "?";
}

NormSeries norm_series(const Trajectory& traj, char which, Operand op, int order) {
  if (which != 'u' && which != 'b') throw PreconditionError("norm_series: field must be 'u' or 'b'");
  NormSeries out;
  out.order = order;
  out.homogeneous = true;
  out.operand = op;
  out.label = std::string(to_string(op)) + "(" + which + ") Hdot^" + std::to_string(order);
  for (const auto& smp : traj.samples) {
    const std::vector<double>* table = nullptr;
    switch (op) {
      case Operand::field: table = which == 'u' ? &smp.u_hom : &smp.b_hom; break;
      case Operand::d_theta: table = which == 'u' ? &smp.dtu_hom : &smp.dtb_hom; break;
      case Operand::time_derivative: table = which == 'u' ? &smp.ut_hom : &smp.bt_hom; break;
    }
    if (order < 0 || order >= static_cast<int>(table->size())) {
      throw PreconditionError("norm_series: order " + std::to_string(order) + " was not recorded");
    }
    out.times.push_back(smp.t);
    out.values.push_back(std::sqrt((*table)[order]));
  }
  return out;
}

DecayFit decay_fit(const NormSeries& series, double t_min) {
  if (series.times.size() != series.values.size()) throw PreconditionError("decay_fit: length mismatch");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < series.times.size(); ++i) {
    if (series.times[i] >= t_min && series.values[i] > 0.0) {
      x.push_back(std::log1p(series.times[i]));
      y.push_back(std::log(series.values[i]));
    }
  }
  if (x.size() < 10) {
    throw PreconditionError("decay_fit: need at least 10 positive samples beyond t_min (have " +
                            std::to_string(x.size()) + ")");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw PreconditionError("decay_fit: all samples at the same time");
  DecayFit fit;
  fit.exponent = sxy / sxx;
  fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  fit.points = x.size();
  return fit;
}

std::vector<DiagnosticsRow> diagnostics_table(const Trajectory& traj) {
  std::vector<DiagnosticsRow> rows;
  rows.reserve(traj.samples.size());
  FunctionalAccumulator acc(traj.norms.s, traj.norms.sigma);
  for (const auto& smp : traj.samples) {
    acc.add(smp);
    const auto& f = acc.current();
    DiagnosticsRow r;
    r.values = {smp.t,
                std::sqrt(smp.u_hom[0]),
                std::sqrt(smp.b_hom[0]),
                std::sqrt(binomial_combination(smp.u_hom, 2)),
                std::sqrt(binomial_combination(smp.b_hom, 2)),
                smp.top_u,
                smp.top_b,
                std::sqrt(smp.u_neg),
                std::sqrt(smp.b_neg),
                std::sqrt(smp.dtu_hom[1]),
                std::sqrt(smp.dtb_hom[1]),
                std::sqrt(smp.ut_hom[0]),
                std::sqrt(smp.bt_hom[0]),
                smp.energy_law_drift,
                smp.parity_err_u,
                smp.parity_err_b,
                smp.zero_mode_max,
                smp.leakage,
                f.E0,
                f.E1,
                f.e0,
                f.e1,
                f.E_total};
    rows.push_back(r);
  }
  return rows;
}

}  // namespace mhdlab
