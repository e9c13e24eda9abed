#include <catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "mhdlab/errors.hpp"
#include "mhdlab/harness.hpp"
#include "mhdlab/norms.hpp"

using namespace mhdlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "mhdlab_test_harness" / name;
  fs::remove_all(p);
  return p;
}

RunConfig small(const std::string& name) {
  RunConfig c;
  c.grid.n = 64;
  c.grid.box_half_length = 2.0;
  c.solver.dt = 2e-3;
  c.solver.t_end = 0.2;
  c.solver.sample_stride = 10;
  c.initial.envelope.radius = 1.0;
  c.initial.envelope.carrier_spacing = 0.5;
  c.output.dir = scratch(name).string();
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("initial data meet the amplitude in the joint norm", "[harness]") {
  RunConfig c = small("init");
  c.initial.amplitude = 3e-2;
  const State s = initial_state(c);
  const double sigma = c.solver.norms.sigma;
  const double neg = std::hypot(sobolev_norm(s.u, -sigma, true), sobolev_norm(s.b, -sigma, true));
  const double high = std::hypot(sobolev_norm(s.u, 10.0, false), sobolev_norm(s.b, 10.0, false));
  CHECK(neg + high == Catch::Approx(3e-2).epsilon(1e-12));
  CHECK_NOTHROW(validate(s));
  CHECK(sobolev_norm(s.b, 0.0, false) > 0.0);
  c.initial.b_weight = 0.0;
  CHECK(sobolev_norm(initial_state(c).b, 0.0, false) == 0.0);
  c.initial.seed = 2;
  CHECK(sobolev_norm(initial_state(c).u - s.u, 0.0, false) > 0.0);
}

TEST_CASE("identical configurations give byte-identical CSV", "[harness][determinism]") {
  const RunConfig a = small("det_a");
  RunConfig b = a;
  b.output.dir = scratch("det_b").string();
  const RunRecord ra = run(a);
  const RunRecord rb = run(b);
  CHECK(ra.exit_code == kExitOk);
  const std::string csv = read_file(fs::path(a.output.dir) / "diagnostics.csv");
  CHECK(csv == read_file(fs::path(b.output.dir) / "diagnostics.csv"));
  const auto ls = lines(csv);
  REQUIRE(ls.size() == 1 + 11);
  CHECK(ls[0].rfind("t,L2_u,L2_b,H2_u,H2_b,Hs_top_u,Hs_top_b,Hneg_u,Hneg_b,dtheta_H1_u", 0) == 0);
  const std::string tail = "leakage,E0,E1,e0,e1,E_total";
  CHECK(ls[0].substr(ls[0].size() - tail.size()) == tail);
  // Values survive the text form exactly.
  for (std::size_t r = 0; r < ra.rows.size(); ++r) {
    std::istringstream in(ls[r + 1]);
    std::string cell;
    for (std::size_t c = 0; std::getline(in, cell, ','); ++c) CHECK(std::strtod(cell.c_str(), nullptr) == ra.rows[r].values[c]);
  }
}

TEST_CASE("run records echo the configuration and checksum the artifacts", "[harness]") {
  RunConfig c = small("record");
  const std::string text = "grid:\n  n: 64   # comment kept\n";
  run(c, text);
  const auto j = nlohmann::json::parse(read_file(fs::path(c.output.dir) / "record.json"));
  CHECK(j["config_echo"] == text);
  CHECK(parse_config_text(j["effective_config"].get<std::string>()) == c);
  CHECK(j["samples"] == 11);
  CHECK(j["exit_code"] == 0);
  for (const char* f : {"diagnostics.csv", "functionals.json", "initial.mhdsnap", "final.mhdsnap", "config.yaml"}) {
    INFO(f);
    REQUIRE(j["checksums"].contains(f));
    CHECK(j["checksums"][f] == crc32_hex(read_file(fs::path(c.output.dir) / f)));
  }
  CHECK(crc32_hex("123456789") == "cbf43926");
}

TEST_CASE("snapshots round-trip and detect corruption", "[harness][snapshot]") {
  const RunConfig c = small("snap");
  State s = initial_state(c);
  s.t = 0.125;
  const std::string bytes = encode_snapshot(s);
  CHECK(bytes.rfind("MHDSNAP 1\n", 0) == 0);
  CHECK(bytes.find("endianness: little") != std::string::npos);
  const State back = decode_snapshot(bytes);
  CHECK(back.t == 0.125);
  CHECK(back.grid().spec() == s.grid().spec());
  const double scale = sobolev_norm(s.u, 0.0, false) + sobolev_norm(s.b, 0.0, false);
  CHECK(sobolev_norm(back.u - s.u, 0.0, false) < 1e-14 * scale);
  CHECK(sobolev_norm(back.b - s.b, 0.0, false) < 1e-14 * scale);
  CHECK_NOTHROW(validate(back));
  // Raw arrays start right after the header and hold u1 on the grid.
  const PhysicalField u1 = inverse_transform(s.u[0]);
  const auto start = bytes.find("end_header\n") + 11;
  double first = 0.0;
  std::memcpy(&first, bytes.data() + start + 8 * 5, 8);
  CHECK(first == u1[5]);

  std::string bad = bytes;
  bad[start + 100] ^= 0x01;
  CHECK_THROWS_AS(decode_snapshot(bad), IoError);
  CHECK_THROWS_AS(decode_snapshot(bytes.substr(0, bytes.size() - 20)), IoError);
  CHECK_THROWS_AS(decode_snapshot("hello"), IoError);

  const fs::path file = scratch("snapfile");
  fs::create_directories(file);
  write_snapshot(file / "s.mhdsnap", s);
  CHECK(read_snapshot(file / "s.mhdsnap").t == 0.125);
  CHECK_THROWS_AS(read_snapshot(file / "missing.mhdsnap"), IoError);
}

TEST_CASE("intermediate snapshots do not change the trajectory", "[harness][snapshot]") {
  RunConfig a = small("seg_a");
  RunConfig b = a;
  b.output.dir = scratch("seg_b").string();
  b.output.snapshot_every = 4;
  run(a);
  run(b);
  CHECK(read_file(fs::path(a.output.dir) / "diagnostics.csv") == read_file(fs::path(b.output.dir) / "diagnostics.csv"));
  CHECK(read_file(fs::path(a.output.dir) / "final.mhdsnap") == read_file(fs::path(b.output.dir) / "final.mhdsnap"));
  CHECK(fs::exists(fs::path(b.output.dir) / "snap_00000040.mhdsnap"));
  CHECK(fs::exists(fs::path(b.output.dir) / "snap_00000080.mhdsnap"));
  CHECK_FALSE(fs::exists(fs::path(b.output.dir) / "snap_00000100.mhdsnap"));
  CHECK(read_snapshot(fs::path(b.output.dir) / "snap_00000040.mhdsnap").t == Catch::Approx(0.08));
}

TEST_CASE("modes dispatch", "[harness]") {
  RunConfig lin = small("linear");
  lin.mode = RunMode::linear;
  const RunRecord rl = run(lin);
  CHECK(rl.exit_code == kExitOk);
  CHECK(rl.rows.size() == 11);

  RunConfig ineq = small("ineq");
  ineq.mode = RunMode::inequalities;
  ineq.inequalities.surveys = {"poincare:0", "commutator:1", "gn:l2_neg_h1"};
  ineq.inequalities.trials = 2;
  const RunRecord ri = run(ineq);
  REQUIRE(ri.reports.size() == 3);
  for (const char* f : {"inequality_poincare_0.json", "inequality_commutator_1.csv", "inequality_gn_l2_neg_h1.json"}) {
    CHECK(fs::exists(fs::path(ineq.output.dir) / f));
  }

  RunConfig sw = small("sweep");
  sw.mode = RunMode::sweep;
  sw.solver.t_end = 0.04;
  const RunRecord rs = run(sw);
  REQUIRE(rs.children.size() == 3);
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto dir = fs::path(sw.output.dir) / rs.children[i];
    const RunConfig child = parse_config(dir / "config.yaml");
    CHECK(child.initial.amplitude == sw.sweep.amplitudes[i]);
    CHECK(child.mode == RunMode::simulate);
    seeds.push_back(child.initial.seed);
    CHECK(fs::exists(dir / "diagnostics.csv"));
  }
  CHECK(seeds[0] != seeds[1]);
  CHECK(seeds[1] != seeds[2]);
}

TEST_CASE("numerical aborts are recorded with exit code 3", "[harness]") {
  RunConfig c = small("abort");
  c.solver.leakage_abort_threshold = 1e-300;
  const RunRecord r = run(c);
  CHECK(r.aborted);
  CHECK(r.exit_code == kExitNumerical);
  CHECK_FALSE(r.abort_reason.empty());
  const auto j = nlohmann::json::parse(read_file(fs::path(c.output.dir) / "record.json"));
  CHECK(j["exit_code"] == 3);
}

TEST_CASE("report over empty, single and corrupt inputs", "[harness][report]") {
  const ReportSummary none = report({});
  CHECK(none.records == 0);
  CHECK(lines(none.summary_csv).size() == 1);
  CHECK(none.problems.empty());

  RunConfig c = small("rep_one");
  c.solver.dt = 5e-3;
  c.solver.t_end = 3.0;
  const RunRecord r = run(c);
  const ReportSummary one = report({c.output.dir});
  REQUIRE(one.records == 1);
  const auto ls = lines(one.summary_csv);
  REQUIRE(ls.size() == 2);
  std::vector<std::string> cells;
  {
    std::istringstream in(ls[1]);
    for (std::string cell; std::getline(in, cell, ',');) cells.push_back(cell);
  }
  REQUIRE(cells.size() == 16);
  CHECK(cells[1] == "simulate");
  CHECK(cells[2] == std::to_string(r.rows.size()));
  // Recomputation oracle: the decay column is decay_fit on the L2_u series.
  NormSeries l2;
  for (const auto& row : r.rows) {
    l2.times.push_back(row.values[0]);
    l2.values.push_back(row.values[1]);
  }
  CHECK(std::strtod(cells[9].c_str(), nullptr) == decay_fit(l2, kDecayFitStart).exponent);
  CHECK(std::strtod(cells[8].c_str(), nullptr) == r.functionals->E_total);
  CHECK(lines(one.series_csv).size() == 1 + r.rows.size() * 22);

  RunConfig d = small("rep_corrupt");
  run(d);
  {
    std::string csv = read_file(fs::path(d.output.dir) / "diagnostics.csv");
    csv[csv.size() / 2] = csv[csv.size() / 2] == '1' ? '2' : '1';
    write_file(fs::path(d.output.dir) / "diagnostics.csv", csv);
  }
  const fs::path junk = scratch("rep_junk");
  fs::create_directories(junk);
  write_file(junk / "record.json", "{ not json");
  const ReportSummary mixed = report({d.output.dir, c.output.dir, junk, scratch("rep_missing")});
  CHECK(mixed.records == 1);
  CHECK(mixed.problems.size() == 3);
  CHECK(mixed.problems[0].find("checksum") != std::string::npos);
}
