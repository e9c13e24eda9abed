#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mhdlab/dynamics.hpp"
#include "mhdlab/fields.hpp"
#include "mhdlab/grid.hpp"

namespace mhdlab {

enum class RunMode { simulate, linear, inequalities, sweep };

std::string_view to_string(RunMode m);
RunMode run_mode_from_string(std::string_view s);

struct InitialDataConfig {
  std::uint64_t seed = 1;
  /// Size of the pair in |(u, b)|_{Hdot^-sigma} + |(u, b)|_{H^{2s+6}}.
  double amplitude = 1e-2;
  /// Relative weight of b before the pair is scaled to the amplitude.
  double b_weight = 1.0;
  Envelope envelope{};
  ParityClass u_class = ParityClass::velocity_like;
  ParityClass b_class = ParityClass::magnetic_like;
  bool operator==(const InitialDataConfig&) const = default;
};

struct OutputConfig {
  std::string dir = "out";
  /// Snapshot every this many samples (0: final state only).
  int snapshot_every = 0;
  bool operator==(const OutputConfig&) const = default;
};

struct InequalityConfig {
  /// Empty: every built-in survey.
  std::vector<std::string> surveys;
  int trials = 100;
  std::uint64_t seed = 7;
  bool operator==(const InequalityConfig&) const = default;
};

struct SweepConfig {
  std::vector<double> amplitudes{1e-3, 1e-2, 1e-1};
  bool operator==(const SweepConfig&) const = default;
};

struct RunConfig {
  RunMode mode = RunMode::simulate;
  GridSpec grid{128, 4.0, 2.0 / 3.0, 0.8};
  SolverConfig solver = default_solver();
  InitialDataConfig initial{};
  OutputConfig output{};
  InequalityConfig inequalities{};
  SweepConfig sweep{};

  static SolverConfig default_solver() {
    SolverConfig s;
    s.t_end = 10.0;
    return s;
  }
  bool operator==(const RunConfig&) const = default;
};

/// All surveys run by the inequalities mode when none are listed.
std::vector<std::string> default_surveys();

/// Parses structured key-value text (YAML). Missing keys take defaults; every
/// unknown key and out-of-range value is reported in one ConfigError.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);
/// Complete config with every key, at full precision; parse(serialize(c)) == c.
std::string serialize_config(const RunConfig& c);
/// Throws ConfigError listing every violated bound.
void validate(const RunConfig& c);

}  // namespace mhdlab
