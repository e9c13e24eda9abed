#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mhdlab/config.hpp"
#include "mhdlab/diagnostics.hpp"
#include "mhdlab/dynamics.hpp"
#include "mhdlab/inequality.hpp"

namespace mhdlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;
inline constexpr int kExitIo = 4;

/// Start of the fitting window for decay exponents.
inline constexpr double kDecayFitStart = 1.0;

struct RunRecord {
  RunMode mode = RunMode::simulate;
  std::string config_echo;       ///< the configuration text exactly as given
  std::string effective_config;  ///< serialized after command-line overrides
  std::vector<DiagnosticsRow> rows;
  std::optional<EnergyFunctionals> functionals;
  std::optional<DecayFit> decay_h4_u;
  std::vector<InequalityReport> reports;
  std::vector<std::string> children;  ///< sweep: child directories, relative to the output dir
  bool aborted = false;
  std::string abort_reason;
  double wall_seconds = 0.0;
  std::map<std::string, std::string> checksums;  ///< artifact file name -> crc32 (hex)
  int exit_code = kExitOk;
};

/// Thread budget from MHDLAB_THREADS (default 1).
int thread_budget();

/// The initial pair: u and b drawn with seeds derived from initial.seed, b weighted
/// by b_weight, then both scaled so that |(u,b)|_{Hdot^-sigma} + |(u,b)|_{H^{2s+6}}
/// equals the amplitude.
State initial_state(const RunConfig& cfg);

/// Dispatches on cfg.mode and writes the artifacts into cfg.output.dir. Numerical
/// aborts are recorded (exit code 3); I/O failures throw IoError. `config_text` is
/// echoed verbatim; when empty the serialized config is used.
RunRecord run(const RunConfig& cfg, const std::string& config_text = {});

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows);
std::string functionals_json(const EnergyFunctionals& f, const std::optional<DecayFit>& fit);
std::string record_json(const RunRecord& r);

std::string crc32_hex(const std::string& bytes);
void write_file(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

/// Snapshot container: a text header (one "key: value" per line, ending with
/// "end_header"), then the physical arrays u1, u2, b1, b2 as little-endian float64
/// in row-major order (x1 slow), then a trailer line "crc32: XXXXXXXX" over all
/// preceding bytes.
std::string encode_snapshot(const State& s);
State decode_snapshot(const std::string& bytes);
void write_snapshot(const std::filesystem::path& path, const State& s);
State read_snapshot(const std::filesystem::path& path);

struct ReportSummary {
  /// One row per readable record: final functionals, decay exponents, maxima.
  std::string summary_csv;
  /// Long form: record,t,quantity,value for every CSV column of every record.
  std::string series_csv;
  /// Inputs that could not be read, with the reason.
  std::vector<std::string> problems;
  int records = 0;
};

/// Each path is a run directory or its record.json. Unreadable or corrupt records
/// are listed in `problems` and skipped.
ReportSummary report(const std::vector<std::filesystem::path>& paths);

}  // namespace mhdlab
