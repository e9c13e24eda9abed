#include "mhdlab/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <ctime>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <zlib.h>

#include "mhdlab/errors.hpp"
#include "mhdlab/norms.hpp"

namespace mhdlab {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// JSON has no infinities or NaN; they are written as strings.
ojson num(double x) {
  if (std::isfinite(x)) return x;
  return fmt17(x);
}

double as_double(const ojson& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return std::strtod(j.get<std::string>().c_str(), nullptr);
  throw IoError("expected a number");
}

std::string utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string survey_file_stem(const std::string& id) {
  std::string s = "inequality_" + id;
  std::replace(s.begin(), s.end(), ':', '_');
  return s;
}

void put(RunRecord& rec, const fs::path& dir, const std::string& name, const std::string& bytes) {
  write_file(dir / name, bytes);
  rec.checksums[name] = crc32_hex(bytes);
}

// ---------------------------------------------------------------------------

void run_trajectory(const RunConfig& cfg, const fs::path& dir, RunRecord& rec) {
  SolverConfig solver = cfg.solver;
  if (cfg.mode == RunMode::linear) solver.terms.nonlinear = false;
  solver.keep_states = false;
  const State initial = initial_state(cfg);
  put(rec, dir, "initial.mhdsnap", encode_snapshot(initial));

  const long total = std::lround(solver.t_end / solver.dt);
  const long segment = cfg.output.snapshot_every > 0 ? long(cfg.output.snapshot_every) * solver.sample_stride : total;
  long reached = std::min(std::max(segment, 1L), total);
  SolverConfig part = solver;
  part.t_end = reached * solver.dt;
  Trajectory traj;
  try {
    traj = simulate(initial, part);
  } catch (const NumericalError& e) {
    rec.aborted = true;
    rec.abort_reason = std::string("numerical: ") + e.what();
  } catch (const TruncationError& e) {
    rec.aborted = true;
    rec.abort_reason = std::string("truncation: ") + e.what();
  }
  if (rec.aborted) {
    rec.exit_code = kExitNumerical;
    return;
  }
  while (!traj.aborted && traj.steps < total) {
    char name[48];
    std::snprintf(name, sizeof name, "snap_%08ld.mhdsnap", traj.steps);
    put(rec, dir, name, encode_snapshot(traj.final_state));
    reached = std::min(reached + segment, total);
    part.t_end = reached * solver.dt;
    extend(traj, part);
  }
  put(rec, dir, "final.mhdsnap", encode_snapshot(traj.final_state));

  rec.rows = diagnostics_table(traj);
  rec.functionals = energy_functionals(traj, solver.norms.s, solver.norms.sigma);
  try {
    rec.decay_h4_u = decay_fit(norm_series(traj, 'u', Operand::field, 4), kDecayFitStart);
  } catch (const Error&) {
    rec.decay_h4_u.reset();
  }
  put(rec, dir, "diagnostics.csv", diagnostics_csv(rec.rows));
  put(rec, dir, "functionals.json", functionals_json(*rec.functionals, rec.decay_h4_u));
  if (traj.aborted) {
    rec.aborted = true;
    rec.abort_reason = traj.abort_reason;
    rec.exit_code = kExitNumerical;
  }
}

void run_inequalities(const RunConfig& cfg, const fs::path& dir, RunRecord& rec) {
  const auto ids = cfg.inequalities.surveys.empty() ? default_surveys() : cfg.inequalities.surveys;
  for (const auto& id : ids) {
    SurveySpec spec;
    spec.inequality = id;
    spec.grid = cfg.grid;
    spec.envelope = cfg.initial.envelope;
    spec.cls = cfg.initial.u_class;
    spec.trials = cfg.inequalities.trials;
    spec.seed = cfg.inequalities.seed;
    spec.threads = thread_budget();
    InequalityReport r = ensemble_survey(spec);
    const std::string stem = survey_file_stem(id);
    put(rec, dir, stem + ".json", report_json(r));
    put(rec, dir, stem + ".csv", report_csv(r));
    rec.reports.push_back(std::move(r));
  }
}

void run_sweep(const RunConfig& cfg, const fs::path& dir, RunRecord& rec) {
  const std::size_t count = cfg.sweep.amplitudes.size();
  std::vector<RunConfig> children(count, cfg);
  for (std::size_t i = 0; i < count; ++i) {
    auto& c = children[i];
    c.mode = RunMode::simulate;
    c.initial.amplitude = cfg.sweep.amplitudes[i];
    c.initial.seed = trial_seed(cfg.initial.seed, i);
    char name[32];
    std::snprintf(name, sizeof name, "child_%03zu", i);
    c.output.dir = (dir / name).string();
    rec.children.push_back(name);
  }
  std::vector<int> codes(count, kExitOk);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < count;) {
      try {
        codes[i] = run(children[i]).exit_code;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const int threads = std::min<int>(thread_budget(), static_cast<int>(count));
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (codes[i] != kExitOk) {
      rec.aborted = true;
      rec.exit_code = std::max(rec.exit_code, codes[i]);
      rec.abort_reason += (rec.abort_reason.empty() ? "" : "; ") + rec.children[i] + " aborted";
    }
  }
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void append_le(std::string& out, const double* v, std::size_t count) {
  const std::size_t start = out.size();
  out.resize(start + count * 8);
  std::memcpy(out.data() + start, v, count * 8);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) std::reverse(out.begin() + start + 8 * i, out.begin() + start + 8 * i + 8);
  }
}

void read_le(const char* in, double* v, std::size_t count) {
  std::memcpy(v, in, count * 8);
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(v);
    for (std::size_t i = 0; i < count; ++i) std::reverse(bytes + 8 * i, bytes + 8 * i + 8);
  }
}

}  // namespace

int thread_budget() {
  if (const char* env = std::getenv("MHDLAB_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

State initial_state(const RunConfig& cfg) {
  validate(cfg);
  const GridPtr grid = Grid::make(cfg.grid);
  const auto& in = cfg.initial;
  const SmallnessNorm norm{cfg.solver.norms.s, cfg.solver.norms.sigma};
  State s = State::zero(grid);
  s.u = random_symmetric_field(grid, trial_seed(in.seed, 0), in.envelope, in.u_class, 1.0, norm);
  if (in.b_weight > 0.0) {
    s.b = random_symmetric_field(grid, trial_seed(in.seed, 1), in.envelope, in.b_class, in.b_weight, norm);
  }
  const double sigma = cfg.solver.norms.sigma;
  const double top = 2.0 * cfg.solver.norms.s + 6.0;
  const double neg = std::hypot(sobolev_norm(s.u, -sigma, true), sobolev_norm(s.b, -sigma, true));
  const double high = std::hypot(sobolev_norm(s.u, top, false), sobolev_norm(s.b, top, false));
  const double scale = in.amplitude / (neg + high);
  s.u *= scale;
  s.b *= scale;
  return s;
}

RunRecord run(const RunConfig& cfg, const std::string& config_text) {
  validate(cfg);
  const auto start = std::chrono::steady_clock::now();
  const std::string started = utc_now();
  RunRecord rec;
  rec.mode = cfg.mode;
  rec.config_echo = config_text;
  rec.effective_config = serialize_config(cfg);
  const fs::path dir = cfg.output.dir;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  put(rec, dir, "config.yaml", rec.effective_config);

  switch (cfg.mode) {
    case RunMode::simulate:
    case RunMode::linear: run_trajectory(cfg, dir, rec); break;
    case RunMode::inequalities: run_inequalities(cfg, dir, rec); break;
    case RunMode::sweep: run_sweep(cfg, dir, rec); break;
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  ojson j = ojson::parse(record_json(rec));
  j["wall_clock"] = {{"started_utc", started}, {"seconds", rec.wall_seconds}};
  write_file(dir / "record.json", j.dump(2) + "\n");
  return rec;
}

std::string diagnostics_csv(const std::vector<DiagnosticsRow>& rows) {
  std::string out;
  for (std::size_t c = 0; c < DiagnosticsRow::kColumns.size(); ++c) {
    out += (c ? "," : "");
    out += DiagnosticsRow::kColumns[c];
  }
  out += "\n";
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.values.size(); ++c) {
      out += (c ? "," : "");
      out += fmt17(r.values[c]);
    }
    out += "\n";
  }
  return out;
}

std::string functionals_json(const EnergyFunctionals& f, const std::optional<DecayFit>& fit) {
  ojson j;
  j["s"] = f.s;
  j["sigma"] = f.sigma;
  j["E0"] = num(f.E0);
  j["E1"] = num(f.E1);
  j["e0"] = num(f.e0);
  j["e1"] = num(f.e1);
  j["E_total"] = num(f.E_total);
  j["E0_sup"] = num(f.E0_sup);
  j["E0_int"] = num(f.E0_int);
  j["E1_sup"] = num(f.E1_sup);
  j["E1_int"] = num(f.E1_int);
  j["e0_sup"] = f.e0_sup;
  j["e0_int"] = f.e0_int;
  j["e1_sup"] = f.e1_sup;
  j["e1_int"] = f.e1_int;
  j["under_resolved"] = f.under_resolved;
  j["max_top_share"] = num(f.max_top_share);
  if (fit) {
    j["decay_H4_u"] = {{"exponent", num(fit->exponent)}, {"r2", num(fit->r2)}, {"points", fit->points},
                       {"t_min", kDecayFitStart}};
  } else {
    j["decay_H4_u"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string record_json(const RunRecord& r) {
  ojson j;
  j["format"] = "mhdlab-record-1";
  j["mode"] = std::string(to_string(r.mode));
  j["config_echo"] = r.config_echo;
  j["effective_config"] = r.effective_config;
  j["samples"] = r.rows.size();
  j["aborted"] = r.aborted;
  j["abort_reason"] = r.abort_reason;
  j["exit_code"] = r.exit_code;
  if (r.functionals) j["functionals"] = ojson::parse(functionals_json(*r.functionals, r.decay_h4_u));
  if (!r.reports.empty()) {
    ojson reps = ojson::array();
    for (const auto& rep : r.reports) {
      reps.push_back({{"inequality_id", rep.inequality_id},
                      {"trials", rep.trials},
                      {"max_ratio", num(rep.max_ratio)},
                      {"median_ratio", num(rep.median_ratio)},
                      {"violations", rep.violations}});
    }
    j["inequality_reports"] = reps;
  }
  if (!r.children.empty()) j["children"] = r.children;
  j["wall_clock"] = {{"seconds", r.wall_seconds}};
  ojson sums = ojson::object();
  for (const auto& [name, crc] : r.checksums) sums[name] = crc;
  j["checksums"] = sums;
  return j.dump(2) + "\n";
}

std::string crc32_hex(const std::string& bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size()));
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

void write_file(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// Snapshots

std::string encode_snapshot(const State& s) {
  const auto& spec = s.grid().spec();
  std::string out = "MHDSNAP 1\n";
  out += "endianness: little\n";
  out += "dtype: float64\n";
  out += "layout: row-major, x1 slow, index i at ((i + n/2) mod n - n/2) * dx\n";
  out += "n: " + std::to_string(spec.n) + "\n";
  out += "L: " + fmt17(spec.box_half_length) + "\n";
  out += "dealias_fraction: " + fmt17(spec.dealias_fraction) + "\n";
  out += "window_core_fraction: " + fmt17(spec.window_core_fraction) + "\n";
  out += "t: " + fmt17(s.t) + "\n";
  out += "fields: u1 u2 b1 b2\n";
  out += "end_header\n";
  for (const VectorField* v : {&s.u, &s.b}) {
    for (int c = 0; c < 2; ++c) {
      const PhysicalField p = inverse_transform((*v)[c]);
      append_le(out, p.data(), p.values().size());
    }
  }
  out += "crc32: " + crc32_hex(out) + "\n";
  return out;
}

State decode_snapshot(const std::string& bytes) {
  const std::string marker = "end_header\n";
  const auto end = bytes.find(marker);
  if (bytes.rfind("MHDSNAP 1\n", 0) != 0 || end == std::string::npos) throw IoError("not a snapshot");
  std::map<std::string, std::string> header;
  {
    std::istringstream in(bytes.substr(0, end));
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      const auto colon = line.find(": ");
      if (colon != std::string::npos) header[line.substr(0, colon)] = line.substr(colon + 2);
    }
  }
  for (const char* key : {"n", "L", "dealias_fraction", "window_core_fraction", "t", "endianness"}) {
    if (!header.count(key)) throw IoError(std::string("snapshot header lacks '") + key + "'");
  }
  if (header["endianness"] != "little") throw IoError("snapshot endianness must be little");
  GridSpec spec;
  spec.n = std::atoi(header["n"].c_str());
  spec.box_half_length = std::strtod(header["L"].c_str(), nullptr);
  spec.dealias_fraction = std::strtod(header["dealias_fraction"].c_str(), nullptr);
  spec.window_core_fraction = std::strtod(header["window_core_fraction"].c_str(), nullptr);
  try {
    validate(spec);
  } catch (const ConfigError& e) {
    throw IoError(std::string("snapshot grid: ") + e.what());
  }
  const std::size_t count = static_cast<std::size_t>(spec.n) * spec.n;
  const std::size_t data_start = end + marker.size();
  const std::size_t data_end = data_start + 4 * count * 8;
  const std::string trailer_key = "crc32: ";
  if (bytes.size() != data_end + trailer_key.size() + 9 || bytes.compare(data_end, trailer_key.size(), trailer_key) != 0) {
    throw IoError("snapshot has the wrong size");
  }
  if (bytes.substr(data_end + trailer_key.size(), 8) != crc32_hex(bytes.substr(0, data_end))) {
    throw IoError("snapshot checksum mismatch");
  }
  const GridPtr grid = Grid::make(spec);
  std::array<ScalarField, 4> comps;
  for (int c = 0; c < 4; ++c) {
    PhysicalField p(grid);
    read_le(bytes.data() + data_start + c * count * 8, p.data(), count);
    comps[c] = dealias(forward_transform(p));
  }
  State s(VectorField(comps[0], comps[1]), VectorField(comps[2], comps[3]), std::strtod(header["t"].c_str(), nullptr));
  s.u.parity = ParityClass::velocity_like;
  s.b.parity = ParityClass::magnetic_like;
  s.u.divergence_free = s.b.divergence_free = true;
  return s;
}

void write_snapshot(const fs::path& path, const State& s) { write_file(path, encode_snapshot(s)); }

State read_snapshot(const fs::path& path) { return decode_snapshot(read_file(path)); }

// ---------------------------------------------------------------------------
// Report

ReportSummary report(const std::vector<fs::path>& paths) {
  ReportSummary out;
  out.summary_csv =
      "record,mode,samples,t_final,E0,E1,e0,e1,E_total,decay_L2_u,decay_L2_u_r2,decay_H4_u,max_parity_err,"
      "max_leakage,max_energy_law_drift,aborted\n";
  out.series_csv = "record,t,quantity,value\n";
  for (const auto& p : paths) {
    const fs::path file = fs::is_directory(p) ? p / "record.json" : p;
    const fs::path dir = file.parent_path();
    try {
      ojson j;
      try {
        j = ojson::parse(read_file(file));
      } catch (const ojson::exception& e) {
        throw IoError(std::string("record is not valid JSON: ") + e.what());
      }
      if (j.value("format", "") != "mhdlab-record-1") throw IoError("not a run record");
      for (const auto& [name, crc] : j.at("checksums").items()) {
        if (crc32_hex(read_file(dir / name)) != crc.get<std::string>()) throw IoError("checksum mismatch for " + name);
      }
      const std::string label = dir.string();
      std::string row = label + "," + j.at("mode").get<std::string>() + ",";
      std::string csv;
      if (j.at("checksums").contains("diagnostics.csv")) csv = read_file(dir / "diagnostics.csv");
      std::vector<std::vector<double>> rows;
      {
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        while (std::getline(in, line)) {
          std::vector<double> v;
          for (const auto& cell : split(line, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
          if (v.size() != DiagnosticsRow::kColumns.size()) throw IoError("diagnostics.csv row has the wrong width");
          rows.push_back(std::move(v));
        }
      }
      std::string series;
      for (const auto& v : rows) {
        for (std::size_t c = 1; c < v.size(); ++c) {
          series += label + "," + fmt17(v[0]) + "," + std::string(DiagnosticsRow::kColumns[c]) + "," + fmt17(v[c]) + "\n";
        }
      }
      if (rows.empty()) {
        row += "0" + std::string(12, ',');
      } else {
        const auto col = [](std::string_view name) {
          return static_cast<std::size_t>(
              std::find(DiagnosticsRow::kColumns.begin(), DiagnosticsRow::kColumns.end(), name) -
              DiagnosticsRow::kColumns.begin());
        };
        const auto& last = rows.back();
        row += std::to_string(rows.size()) + "," + fmt17(last[0]);
        for (const char* name : {"E0", "E1", "e0", "e1", "E_total"}) row += "," + fmt17(last[col(name)]);
        NormSeries l2;
        l2.label = "L2_u";
        for (const auto& v : rows) {
          l2.times.push_back(v[0]);
          l2.values.push_back(v[col("L2_u")]);
        }
        try {
          const DecayFit fit = decay_fit(l2, kDecayFitStart);
          row += "," + fmt17(fit.exponent) + "," + fmt17(fit.r2);
        } catch (const Error&) {
          row += ",,";
        }
        const auto& fj = j.contains("functionals") ? j["functionals"]["decay_H4_u"] : ojson();
        row += "," + (fj.is_object() ? fmt17(as_double(fj["exponent"])) : std::string());
        double parity = 0.0, leak = 0.0, drift = 0.0;
        for (const auto& v : rows) {
          parity = std::max({parity, v[col("parity_err_u")], v[col("parity_err_b")]});
          leak = std::max(leak, v[col("leakage")]);
          drift = std::max(drift, std::abs(v[col("energy_law_drift")]));
        }
        row += "," + fmt17(parity) + "," + fmt17(leak) + "," + fmt17(drift);
      }
      row += std::string(",") + (j.at("aborted").get<bool>() ? "true" : "false") + "\n";
      out.summary_csv += row;
      out.series_csv += series;
      ++out.records;
    } catch (const std::exception& e) {
      out.problems.push_back(file.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mhdlab
