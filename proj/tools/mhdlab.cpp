#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mhdlab/config.hpp"
#include "mhdlab/errors.hpp"
#include "mhdlab/harness.hpp"

using namespace mhdlab;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "configuration file (YAML)");
  cmd->add_option("--seed", c.seed, "seed overriding the configuration");
  cmd->add_option("--out", c.out, "output directory overriding the configuration");
  cmd->add_flag("--quiet", c.quiet, "print nothing on success");
}

void summarize(const RunRecord& r, const RunConfig& cfg) {
  std::printf("mode %s -> %s\n", std::string(to_string(r.mode)).c_str(), cfg.output.dir.c_str());
  if (r.functionals) {
    const auto& f = *r.functionals;
    std::printf("samples %zu  E0 %.6e  E1 %.6e  e0 %.6e  e1 %.6e  E_total %.6e%s\n", r.rows.size(), f.E0, f.E1, f.e0,
                f.e1, f.E_total, f.under_resolved ? "  [under-resolved]" : "");
  }
  if (r.decay_h4_u) std::printf("decay |u|_H4 ~ (1+t)^%.3f (r2 %.3f)\n", r.decay_h4_u->exponent, r.decay_h4_u->r2);
  for (const auto& rep : r.reports) {
    std::printf("%-22s max %.6e  median %.6e  violations %d\n", rep.inequality_id.c_str(), rep.max_ratio,
                rep.median_ratio, rep.violations);
  }
  for (const auto& c : r.children) std::printf("child %s\n", c.c_str());
  if (r.aborted) std::printf("aborted: %s\n", r.abort_reason.c_str());
  std::printf("wall %.2fs\n", r.wall_seconds);
}

int run_mode(RunMode mode, const Common& c) {
  std::string text;
  RunConfig cfg;
  if (!c.config.empty()) {
    text = read_file(c.config);
    cfg = parse_config_text(text);
  }
  cfg.mode = mode;
  if (c.seed) {
    cfg.initial.seed = *c.seed;
    cfg.inequalities.seed = *c.seed;
  }
  if (!c.out.empty()) cfg.output.dir = c.out;
  const RunRecord r = run(cfg, text);
  if (!c.quiet) summarize(r, cfg);
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-spectral lab for rotating-field MHD perturbations"};
  app.require_subcommand(1);
  Common common;
  std::vector<std::pair<CLI::App*, RunMode>> modes;
  for (RunMode m : {RunMode::simulate, RunMode::linear, RunMode::inequalities, RunMode::sweep}) {
    const char* help = m == RunMode::simulate       ? "integrate the perturbation system"
                       : m == RunMode::linear       ? "integrate the linearized system"
                       : m == RunMode::inequalities ? "run the inequality surveys"
                                                    : "simulate over a list of amplitudes";
    auto* cmd = app.add_subcommand(std::string(to_string(m)), help);
    add_common(cmd, common);
    modes.emplace_back(cmd, m);
  }
  std::vector<std::string> inputs;
  std::string report_out;
  bool report_quiet = false;
  auto* rep = app.add_subcommand("report", "summarize run records");
  rep->add_option("records", inputs, "run directories or record.json files");
  rep->add_option("--out", report_out, "directory for summary.csv and series.csv");
  rep->add_flag("--quiet", report_quiet, "do not print the summary");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    for (const auto& [cmd, mode] : modes) {
      if (cmd->parsed()) return run_mode(mode, common);
    }
    std::vector<fs::path> paths(inputs.begin(), inputs.end());
    const ReportSummary s = report(paths);
    if (!report_out.empty()) {
      fs::create_directories(report_out);
      write_file(fs::path(report_out) / "summary.csv", s.summary_csv);
      write_file(fs::path(report_out) / "series.csv", s.series_csv);
    }
    if (!report_quiet) std::cout << s.summary_csv;
    for (const auto& p : s.problems) std::cerr << "skipped " << p << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const TruncationError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
