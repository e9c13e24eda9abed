#include "mhdlab/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "mhdlab/errors.hpp"
#include "mhdlab/inequality.hpp"

namespace mhdlab {

std::string_view to_string(RunMode m) {
  switch (m) {
    case RunMode::simulate: return "simulate";
    case RunMode::linear: return "linear";
    case RunMode::inequalities: return "inequalities";
    case RunMode::sweep: return "sweep";
  }
  return "?";
}

RunMode run_mode_from_string(std::string_view s) {
  for (RunMode m : {RunMode::simulate, RunMode::linear, RunMode::inequalities, RunMode::sweep}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("mode must be simulate, linear, inequalities or sweep (got '" + std::string(s) + "')");
}

std::vector<std::string> default_surveys() {
  std::vector<std::string> out{"poincare:0", "poincare:1", "poincare:2"};
  for (int k = 1; k <= 4; ++k) out.push_back("product:" + std::to_string(k));
  for (int k = 1; k <= 4; ++k) out.push_back("commutator:" + std::to_string(k));
  for (const auto& p : gn_registry()) out.push_back("gn:" + p.id);
  return out;
}

namespace {

// Walks one YAML mapping, converting known keys and remembering problems.
class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::vector<std::string>& errors)
      : node_(node), path_(std::move(path)), errors_(errors) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      errors_.push_back((path_.empty() ? std::string("the configuration") : path_) + " must be a mapping");
      valid_ = false;
    }
  }

  ~Section() {
    if (!valid_ || !node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>("");
      if (!seen_.count(key)) errors_.push_back("unknown key " + qualified(key));
    }
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!valid_ || !node_ || !node_[key]) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      errors_.push_back(qualified(key) + " has the wrong type");
    }
  }

  template <typename T, typename Fn>
  void get_as(const std::string& key, T& out, Fn&& convert) {
    std::string text;
    seen_.insert(key);
    if (!valid_ || !node_ || !node_[key]) return;
    try {
      text = node_[key].as<std::string>();
      out = convert(text);
    } catch (const YAML::Exception&) {
      errors_.push_back(qualified(key) + " has the wrong type");
    } catch (const Error& e) {
      errors_.push_back(qualified(key) + ": " + e.what());
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(valid_ && node_ ? node_[key] : YAML::Node(), qualified(key), errors_);
  }

 private:
  std::string qualified(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
  bool valid_ = true;
};

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep floats recognizable as floats.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

SpectralLaw law_from_string(const std::string& s) {
  if (s == "gaussian") return SpectralLaw::gaussian;
  if (s == "power") return SpectralLaw::power;
  throw ConfigError("must be gaussian or power (got '" + s + "')");
}

std::string_view to_string(SpectralLaw l) { return l == SpectralLaw::gaussian ? "gaussian" : "power"; }

void collect(std::vector<std::string>& errors, const RunConfig& c) {
  auto bad = [&](const std::string& m) { errors.push_back(m); };
  try {
    validate(c.grid);
  } catch (const ConfigError& e) {
    bad(e.what());
  }
  try {
    validate(c.solver);
  } catch (const ConfigError& e) {
    bad(e.what());
  }
  if (c.solver.norms.s < 2) bad("functionals.s must be >= 2 (the H^{2s+6} energy needs s >= 2)");
  const double sigma = c.solver.norms.sigma;
  if (!(sigma >= 3.0 / 23.0 - 1e-15)) {
    bad("functionals.sigma = " + num(sigma) + " is below the lower bound 3/23; sigma must lie in [3/23, 1)");
  } else if (!(sigma < 1.0)) {
    bad("functionals.sigma = " + num(sigma) + " is not below the upper bound 1; sigma must lie in [3/23, 1)");
  }
  const auto& e = c.initial.envelope;
  if (!(e.k0 > 0.0)) bad("initial.envelope.k0 must be > 0");
  if (!(e.radius > 0.0)) bad("initial.envelope.radius must be > 0");
  if (!(e.carrier_spacing > 0.0)) bad("initial.envelope.carrier_spacing must be > 0");
  if (!(e.carrier_cutoff > 0.0)) bad("initial.envelope.carrier_cutoff must be > 0");
  if (e.law == SpectralLaw::power && !(e.exponent > 0.0)) bad("initial.envelope.exponent must be > 0");
  if (!(c.initial.amplitude > 0.0) || !std::isfinite(c.initial.amplitude)) bad("initial.amplitude must be > 0");
  if (!(c.initial.b_weight >= 0.0) || !std::isfinite(c.initial.b_weight)) bad("initial.b_weight must be >= 0");
  if (c.initial.u_class != ParityClass::velocity_like || c.initial.b_class != ParityClass::magnetic_like) {
    bad("initial classes: the symmetry persists only for u velocity_like and b magnetic_like");
  }
  if (c.output.dir.empty()) bad("output.dir must not be empty");
  if (c.output.snapshot_every < 0) bad("output.snapshot_every must be >= 0");
  if (c.inequalities.trials < 0) bad("inequalities.trials must be >= 0");
  for (const auto& id : c.inequalities.surveys) {
    SurveySpec probe;
    probe.inequality = id;
    probe.trials = 0;
    try {
      ensemble_survey(probe);
    } catch (const Error& ex) {
      bad(std::string("inequalities.surveys: ") + ex.what());
    }
  }
  if (c.sweep.amplitudes.empty()) bad("sweep.amplitudes must not be empty");
  for (double a : c.sweep.amplitudes) {
    if (!(a > 0.0) || !std::isfinite(a)) bad("sweep.amplitudes must all be > 0");
  }
}

}  // namespace

void validate(const RunConfig& c) {
  std::vector<std::string> errors;
  collect(errors, c);
  if (errors.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& e : errors) msg += "\n  - " + e;
  throw ConfigError(msg);
}

RunConfig parse_config_text(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("configuration is not valid YAML: ") + e.what());
  }
  RunConfig c;
  std::vector<std::string> errors;
  {
    Section top(root, "", errors);
    top.get_as("mode", c.mode, [](const std::string& s) { return run_mode_from_string(s); });
    {
      Section g = top.child("grid");
      g.get("n", c.grid.n);
      g.get("L", c.grid.box_half_length);
      g.get("dealias_fraction", c.grid.dealias_fraction);
      g.get("window_core_fraction", c.grid.window_core_fraction);
    }
    {
      Section s = top.child("solver");
      s.get("dt", c.solver.dt);
      s.get("t_end", c.solver.t_end);
      s.get("cfl_safety", c.solver.cfl_safety);
      s.get("parity_enforcement", c.solver.parity_enforcement);
      s.get("sample_stride", c.solver.sample_stride);
      s.get("corrector_iterations", c.solver.corrector_iterations);
      s.get("leakage_abort_threshold", c.solver.leakage_abort_threshold);
      s.get("blowup_factor", c.solver.blowup_factor);
    }
    {
      Section f = top.child("functionals");
      f.get("s", c.solver.norms.s);
      f.get("sigma", c.solver.norms.sigma);
    }
    {
      Section i = top.child("initial");
      i.get("seed", c.initial.seed);
      i.get("amplitude", c.initial.amplitude);
      i.get("b_weight", c.initial.b_weight);
      auto cls = [](const std::string& s) { return parity_class_from_string(s); };
      i.get_as("u_class", c.initial.u_class, cls);
      i.get_as("b_class", c.initial.b_class, cls);
      Section e = i.child("envelope");
      e.get_as("law", c.initial.envelope.law, law_from_string);
      e.get("k0", c.initial.envelope.k0);
      e.get("exponent", c.initial.envelope.exponent);
      e.get("radius", c.initial.envelope.radius);
      e.get("carrier_spacing", c.initial.envelope.carrier_spacing);
      e.get("carrier_cutoff", c.initial.envelope.carrier_cutoff);
      e.get("remove_radial_mode", c.initial.envelope.remove_radial_mode);
    }
    {
      Section o = top.child("output");
      o.get("dir", c.output.dir);
      o.get("snapshot_every", c.output.snapshot_every);
    }
    {
      Section q = top.child("inequalities");
      q.get("surveys", c.inequalities.surveys);
      q.get("trials", c.inequalities.trials);
      q.get("seed", c.inequalities.seed);
    }
    {
      Section w = top.child("sweep");
      w.get("amplitudes", c.sweep.amplitudes);
    }
  }
  collect(errors, c);
  if (!errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ConfigError(msg);
  }
  return c;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read configuration '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  const auto b = [](bool x) { return x ? "true" : "false"; };
  o << "mode: " << to_string(c.mode) << "\n";
  o << "grid:\n"
    << "  n: " << c.grid.n << "\n"
    << "  L: " << num(c.grid.box_half_length) << "\n"
    << "  dealias_fraction: " << num(c.grid.dealias_fraction) << "\n"
    << "  window_core_fraction: " << num(c.grid.window_core_fraction) << "\n";
  o << "solver:\n"
    << "  dt: " << num(c.solver.dt) << "\n"
    << "  t_end: " << num(c.solver.t_end) << "\n"
    << "  cfl_safety: " << num(c.solver.cfl_safety) << "\n"
    << "  parity_enforcement: " << b(c.solver.parity_enforcement) << "\n"
    << "  sample_stride: " << c.solver.sample_stride << "\n"
    << "  corrector_iterations: " << c.solver.corrector_iterations << "\n"
    << "  leakage_abort_threshold: " << num(c.solver.leakage_abort_threshold) << "\n"
    << "  blowup_factor: " << num(c.solver.blowup_factor) << "\n";
  o << "functionals:\n"
    << "  s: " << c.solver.norms.s << "\n"
    << "  sigma: " << num(c.solver.norms.sigma) << "\n";
  const auto& e = c.initial.envelope;
  o << "initial:\n"
    << "  seed: " << c.initial.seed << "\n"
    << "  amplitude: " << num(c.initial.amplitude) << "\n"
    << "  b_weight: " << num(c.initial.b_weight) << "\n"
    << "  u_class: " << to_string(c.initial.u_class) << "\n"
    << "  b_class: " << to_string(c.initial.b_class) << "\n"
    << "  envelope:\n"
    << "    law: " << to_string(e.law) << "\n"
    << "    k0: " << num(e.k0) << "\n"
    << "    exponent: " << num(e.exponent) << "\n"
    << "    radius: " << num(e.radius) << "\n"
    << "    carrier_spacing: " << num(e.carrier_spacing) << "\n"
    << "    carrier_cutoff: " << num(e.carrier_cutoff) << "\n"
    << "    remove_radial_mode: " << b(e.remove_radial_mode) << "\n";
  YAML::Emitter dir;
  dir << c.output.dir;
  o << "output:\n"
    << "  dir: " << dir.c_str() << "\n"
    << "  snapshot_every: " << c.output.snapshot_every << "\n";
  o << "inequalities:\n  surveys: [";
  for (std::size_t i = 0; i < c.inequalities.surveys.size(); ++i) {
    o << (i ? ", " : "") << '"' << c.inequalities.surveys[i] << '"';
  }
  o << "]\n"
    << "  trials: " << c.inequalities.trials << "\n"
    << "  seed: " << c.inequalities.seed << "\n";
  o << "sweep:\n  amplitudes: [";
  for (std::size_t i = 0; i < c.sweep.amplitudes.size(); ++i) o << (i ? ", " : "") << num(c.sweep.amplitudes[i]);
  o << "]\n";
  return o.str();
}

}  // namespace mhdlab
