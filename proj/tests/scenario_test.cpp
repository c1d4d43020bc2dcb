#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"
#include "vsim/measures.hpp"
#include "vsim/perturbative.hpp"
#include "vsim/scenario.hpp"

using namespace vsim;
using test::rel_diff;
namespace stdfs = std::filesystem;

namespace {

constexpr const char* kSeriesHeader =
    "t_fs,rho_gg,rho_22,rho_33,re_rho_23,im_rho_23,C,purity,excited_purity,"
    "stderr_rho22,stderr_rho33,stderr_re23,stderr_im23";

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(static_cast<bool>(in));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Split one CSV document into rows of cells; blank cells become NaN.
struct Table {
  std::string header;
  std::vector<std::vector<double>> rows;
};

Table read_csv(const std::string& path) {
  Table t;
  std::istringstream in(slurp(path));
  std::getline(in, t.header);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ','))
      row.push_back(cell.empty() ? std::nan("") : std::stod(cell));
    // NB a trailing empty cell after the last comma is dropped by getline
    t.rows.push_back(row);
  }
  return t;
}

std::string fresh_dir(const std::string& tag) {
  const std::string dir = "scenario_test_out/" + tag;
  stdfs::remove_all(dir);
  return dir;
}

// Minimal valid white-noise scenario used by several cases.
ScenarioConfig white_noise_config() {
  ScenarioConfig cfg;
  cfg.scenario = ScenarioKind::WhiteNoise;
  cfg.excited2_thz = 40.0;
  cfg.excited3_thz = 56.666666666666664;
  cfg.rate2_thz = 1.0;
  cfg.rate3_thz = 1.0;
  cfg.carrier_thz = 48.333333333333336;
  cfg.amplitude = 1.0;
  cfg.pump_power = 1e-6;
  cfg.t_end_fs = 400.0;
  cfg.step_fs = 25.0;
  return cfg;
}

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("config serialization is an exact fixed point") {
  ScenarioConfig cfg;
  cfg.scenario = ScenarioKind::Pulse;
  cfg.mode = RunMode::Ensemble;
  cfg.ground_thz = 0.125;
  cfg.excited2_thz = 510.123456789012;
  cfg.excited3_thz = 529.987654321098;
  cfg.rate2_thz = 5.59325e-5;
  cfg.rate3_thz = 7.1e-5;
  cfg.carrier_thz = 519.5;
  cfg.amplitude = 0.371;
  cfg.tau_d_fs = 60.0;
  cfg.tau_p_fs = 25.0;
  cfg.t_m_fs = 150.0;
  cfg.t_start_fs = 40.0;
  cfg.t_end_fs = 260.0;
  cfg.step_fs = 2.5;
  cfg.ensemble_n = 16;
  cfg.master_seed = 1234567890123456789ULL;
  cfg.workers = 2;
  cfg.noise.jump_model = JumpModel::WienerPaper;
  cfg.noise.drift_coefficient = 40.0;
  cfg.noise.collision_count_min = 9;
  cfg.noise.collision_count_max = 14;
  cfg.integrator.carrier_divisor = 200;
  cfg.out_dir = "some/dir";
  cfg.basename = "roundtrip";

  const std::string s1 = write_config(cfg);
  const ScenarioConfig back = parse_config_text(s1);
  CHECK(write_config(back) == s1);

  CHECK(back.excited2_thz == cfg.excited2_thz);
  CHECK(back.excited3_thz == cfg.excited3_thz);
  CHECK(back.rate2_thz == cfg.rate2_thz);
  CHECK(back.step_fs == cfg.step_fs);
  CHECK(back.master_seed == cfg.master_seed);
  CHECK(back.noise.jump_model == JumpModel::WienerPaper);
  CHECK(back.noise.collision_count_max == 14);
  CHECK(back.integrator.carrier_divisor == 200);
  CHECK(back.out_dir == "some/dir");
  CHECK(back.basename == "roundtrip");
  CHECK(back.mode == RunMode::Ensemble);
}

TEST_CASE("config parser reports precise errors") {
  auto message_of = [](const std::string& text) -> std::string {
    try {
      parse_config_text(text);
    } catch (const std::exception& e) {
      return e.what();
    }
    return "";
  };

  const std::string base =
      "scenario = stationary_f\n"
      "system.excited2_thz = 500\n"
      "system.excited3_thz = 520\n"
      "field.carrier_thz = 510\n"
      "field.tau_d_fs = 10\n";

  CHECK(parse_config_text(base).scenario == ScenarioKind::StationaryF);

  CHECK(message_of(base + "system.bogus = 1\n").find("system.bogus") !=
        std::string::npos);
  CHECK(message_of(base + "field.tau_d_fs = 11\n").find("duplicate") !=
        std::string::npos);
  CHECK(message_of(base + "field.tau_p_fs = abc\n").find("not a number") !=
        std::string::npos);
  CHECK(message_of(base + "just some words\n").find("key = value") !=
        std::string::npos);
  CHECK(message_of(base + "grid.step_fs =\n").find("empty") != std::string::npos);
  CHECK(message_of("field.tau_d_fs = 10\n").find("scenario") != std::string::npos);

  // comments and blank lines are tolerated anywhere
  CHECK_NOTHROW(parse_config_text("# header\n\n" + base + "  # trailing\n"));
}

TEST_CASE("validation rejects inconsistent scenarios with the key named") {
  auto expect_key = [](ScenarioConfig cfg, const std::string& key) {
    try {
      cfg.validate();
      FAIL_CHECK("expected validate() to throw for ", key);
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find(key) != std::string::npos);
    }
  };

  ScenarioConfig wn = white_noise_config();
  CHECK_NOTHROW(wn.validate());
  wn.mode = RunMode::Ensemble;
  expect_key(wn, "mode");

  ScenarioConfig cw = white_noise_config();
  cw.scenario = ScenarioKind::CwSudden;
  cw.tau_d_fs = 0.0;
  expect_key(cw, "field.tau_d_fs");

  ScenarioConfig avg = white_noise_config();
  avg.scenario = ScenarioKind::CwTurnonAvg;
  avg.tau_d_fs = 60.0;
  avg.t_start_fs = 100.0;  // < 10 tau_d
  avg.t_end_fs = 900.0;
  expect_key(avg, "grid.t_start_fs");

  ScenarioConfig pl = white_noise_config();
  pl.scenario = ScenarioKind::Pulse;
  pl.tau_d_fs = 1.32;
  pl.tau_p_fs = 30.0;
  pl.t_m_fs = 150.0;
  pl.t_start_fs = 200.0;  // analytic but inside the pulse
  pl.t_end_fs = 450.0;
  expect_key(pl, "grid.t_start_fs");

  ScenarioConfig corr = white_noise_config();
  corr.scenario = ScenarioKind::CorrelationCheck;
  corr.tau_d_fs = 60.0;
  corr.field_kind = "white";
  expect_key(corr, "field.kind");
  corr.field_kind = "cw";
  corr.ensemble_n = 1;
  expect_key(corr, "ensemble.n");

  ScenarioConfig inverted = white_noise_config();
  inverted.t_end_fs = -1.0;
  expect_key(inverted, "grid.t_end_fs");

  ScenarioConfig sys_bad = white_noise_config();
  sys_bad.excited3_thz = sys_bad.excited2_thz;  // degenerate pair
  expect_key(sys_bad, "system.*");
}

TEST_CASE("bundled example configuration carries the published numbers") {
  const ScenarioConfig cw = preset_pc645("cw");
  CHECK(cw.scenario == ScenarioKind::CwSudden);
  CHECK(cw.excited2_thz == 510.0);
  CHECK(cw.excited3_thz == 529.0);
  CHECK(cw.carrier_thz == 519.5);
  CHECK(cw.tau_d_fs == 1.32);
  CHECK(cw.rate2_thz == cw.rate3_thz);
  CHECK(cw.rate2_thz == 5.59325e-5);
  CHECK(cw.t_end_fs == 1000.0);
  CHECK(cw.resolved_basename() == "pc645_cw");
  CHECK_NOTHROW(cw.validate());

  const ScenarioConfig pulse = preset_pc645("pulse");
  CHECK(pulse.scenario == ScenarioKind::Pulse);
  CHECK(pulse.tau_p_fs == 30.0);
  CHECK(pulse.t_m_fs == 150.0);
  CHECK(pulse.resolved_basename() == "pc645_pulse");
  CHECK_NOTHROW(pulse.validate());

  CHECK_THROWS_AS(preset_pc645("nope"), std::invalid_argument);
}

TEST_CASE("automatic step refines with splitting and sampling constraints") {
  ScenarioConfig cfg = white_noise_config();
  cfg.scenario = ScenarioKind::CwSudden;
  cfg.tau_d_fs = 120.0;
  cfg.t_end_fs = 10000.0;
  cfg.step_fs = 0.0;  // ask for the automatic rules
  // splitting 16.667 THz -> period 60 fs -> tau_c rule gives 1.5 fs,
  // far below span/200 = 50 fs
  CHECK(rel_diff(cfg.resolved_step(), 1.5) < 1e-12);

  cfg.mode = RunMode::Ensemble;
  // sampling adds tau_d/20 = 6 and carrier-period/40; the carrier at
  // 48.333 THz has period 20.69 fs -> 0.517 fs, the binding constraint
  const double carrier_rule = 1.0 / (48.333333333333336e-3 * 40.0);
  CHECK(rel_diff(cfg.resolved_step(), carrier_rule) < 1e-12);

  cfg.step_fs = 0.25;  // explicit override wins
  CHECK(cfg.resolved_step() == 0.25);
}

TEST_CASE("white-noise series: exact columns and the closed-form C") {
  ScenarioConfig cfg = white_noise_config();
  cfg.out_dir = fresh_dir("wn");
  cfg.basename = "wn";
  const RunResult res = run_scenario(cfg);

  const Table t = read_csv(res.csv_path);
  CHECK(t.header == kSeriesHeader);
  REQUIRE(t.rows.size() == 17);  // 0..400 by 25

  const VSystem sys = cfg.to_system();
  const double eff_pump = cfg.pump_power;  // amplitude = 1
  for (const std::vector<double>& row : t.rows) {
    REQUIRE(row.size() >= 9);
    const double tt = row[0];
    const ExcitedBlock blk = white_noise_block(sys, eff_pump, tt);
    CHECK(std::abs(row[2] - blk.pop_i) < 1e-8 * std::max(blk.pop_i, 1e-30) + 1e-15);
    CHECK(std::abs(row[3] - blk.pop_j) < 1e-8 * std::max(blk.pop_j, 1e-30) + 1e-15);
    CHECK(std::abs(row[1] - (1.0 - blk.pop_i - blk.pop_j)) < 1e-7);
    if (tt == 0.0) {
      CHECK(std::isnan(row[6]));  // C undefined before any excitation
    } else {
      CHECK(std::abs(row[6] - c_white(sys, tt)) < 1e-7);
    }
  }
  CHECK(rel_diff(res.final_c, c_white(sys, 400.0)) < 1e-12);

  // JSON sidecar: well formed, echoes the config, counts the rows
  const nlohmann::json j = nlohmann::json::parse(slurp(res.json_path));
  CHECK(j.at("scenario") == "white_noise");
  CHECK(j.at("rows") == 17);
  CHECK(j.at("config").at("field.pump_power") == "9.9999999999999995e-07");
  CHECK(j.at("outputs").at("csv") == res.csv_path);
}

TEST_CASE("analytic CW series matches the closed form row by row") {
  ScenarioConfig cfg = white_noise_config();
  cfg.scenario = ScenarioKind::CwSudden;
  cfg.tau_d_fs = 120.0;
  cfg.amplitude = 0.05;
  cfg.rate2_thz = 1.0;
  cfg.rate3_thz = 1.0;
  cfg.t_end_fs = 300.0;
  cfg.step_fs = 50.0;
  cfg.out_dir = fresh_dir("cw");
  cfg.basename = "cw";
  const RunResult res = run_scenario(cfg);

  const Table t = read_csv(res.csv_path);
  CHECK(t.header == kSeriesHeader);
  const VSystem sys = cfg.to_system();
  const FieldSpec spec = cfg.to_field_spec();
  for (const std::vector<double>& row : t.rows) {
    const ExcitedBlock blk = excited_block_cw(sys, spec, row[0]);
    const double scale = std::max(blk.trace(), 1e-30);
    CHECK(std::abs(row[2] - blk.pop_i) < 1e-7 * scale + 1e-18);
    CHECK(std::abs(row[3] - blk.pop_j) < 1e-7 * scale + 1e-18);
    CHECK(std::abs(row[4] - blk.coh_ij.real()) < 1e-7 * scale + 1e-18);
    CHECK(std::abs(row[5] - blk.coh_ij.imag()) < 1e-7 * scale + 1e-18);
  }
}

TEST_CASE("turn-on-averaged series carries the stationary fraction") {
  ScenarioConfig cfg = white_noise_config();
  cfg.scenario = ScenarioKind::CwTurnonAvg;
  cfg.tau_d_fs = 60.0;
  cfg.amplitude = 0.05;
  cfg.t_start_fs = 600.0;
  cfg.t_end_fs = 900.0;
  cfg.step_fs = 100.0;
  cfg.out_dir = fresh_dir("avg");
  cfg.basename = "avg";
  const RunResult res = run_scenario(cfg);

  const VSystem sys = cfg.to_system();
  const FieldSpec spec = cfg.to_field_spec();
  CHECK(rel_diff(res.final_c, c_measure(turnon_averaged_block(sys, spec, 900.0))) <
        1e-9);
  // row-by-row: fixed coherence over linearly growing populations
  const Table t = read_csv(res.csv_path);
  REQUIRE(t.rows.size() == 4);
  for (const std::vector<double>& row : t.rows) {
    const ExcitedBlock blk = turnon_averaged_block(sys, spec, row[0]);
    CHECK(rel_diff(row[6], c_measure(blk)) < 1e-6);
  }
  CHECK(t.rows.front()[6] > t.rows.back()[6]);  // C decays as 1/t here
}

TEST_CASE("ensemble CSV artifacts are byte-identical across reruns") {
  ScenarioConfig cfg = white_noise_config();
  cfg.scenario = ScenarioKind::CwSudden;
  cfg.mode = RunMode::Ensemble;
  cfg.tau_d_fs = 60.0;
  cfg.amplitude = 0.05;
  cfg.t_end_fs = 30.0;
  cfg.step_fs = 3.0;
  cfg.ensemble_n = 8;
  cfg.workers = 2;
  cfg.basename = "ens";

  cfg.out_dir = fresh_dir("ens_a");
  const RunResult a = run_scenario(cfg);
  cfg.out_dir = fresh_dir("ens_b");
  cfg.workers = 1;  // worker count must not leak into the artifact
  const RunResult b = run_scenario(cfg);
  CHECK(slurp(a.csv_path) == slurp(b.csv_path));

  cfg.out_dir = fresh_dir("ens_c");
  cfg.master_seed += 1;
  const RunResult c = run_scenario(cfg);
  CHECK(slurp(a.csv_path) != slurp(c.csv_path));

  // stderr columns are populated in ensemble mode
  const Table t = read_csv(a.csv_path);
  REQUIRE(t.rows.back().size() == 13);
  CHECK(t.rows.back()[9] > 0.0);
}

TEST_CASE("stationary sweep reproduces the closed forms per row") {
  ScenarioConfig cfg = white_noise_config();
  cfg.scenario = ScenarioKind::StationaryF;
  cfg.tau_d_fs = 1.0;
  cfg.out_dir = fresh_dir("sweep");
  cfg.basename = "sf";

  const std::vector<double> taus{25.0, 50.0, 100.0};
  const SweepResult sw = run_sweep(cfg, "field.tau_d_fs", taus);
  REQUIRE(sw.columns.size() == 4);
  CHECK(sw.columns[0] == "field.tau_d_fs");
  CHECK(sw.columns[1] == "f_squared");
  CHECK(sw.columns[2] == "saturation");
  CHECK(sw.columns[3] == "u_level3");
  REQUIRE(sw.rows.size() == taus.size());

  const VSystem sys = cfg.to_system();
  for (size_t k = 0; k < taus.size(); ++k) {
    const FieldSpec spec = FieldSpec::cw(angular(cfg.carrier_thz), 1.0, taus[k]);
    const StationaryCoherence st = stationary_coherence(sys, spec);
    CHECK(sw.rows[k][0] == taus[k]);
    CHECK(rel_diff(sw.rows[k][1], st.f_squared) < 1e-12);
    CHECK(rel_diff(sw.rows[k][2], st.saturation) < 1e-12);
    CHECK(rel_diff(sw.rows[k][3], lorentzian_u(sys.omega_kg(1), spec)) < 1e-12);
  }

  // the sweep CSV exists and lists one line per value
  const Table t = read_csv(sw.csv_path);
  CHECK(t.rows.size() == taus.size());

  try {
    run_sweep(cfg, "system.not_an_axis", taus);
    FAIL_CHECK("expected unknown-axis rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("field.tau_d_fs") != std::string::npos);
  }
}

TEST_CASE("correlation check produces a kernel table and a verdict") {
  ScenarioConfig cfg = white_noise_config();
  cfg.scenario = ScenarioKind::CorrelationCheck;
  cfg.field_kind = "cw";
  cfg.tau_d_fs = 60.0;
  cfg.t_end_fs = 30.0;
  cfg.step_fs = 3.0;
  cfg.ensemble_n = 200;
  cfg.workers = 2;
  cfg.out_dir = fresh_dir("kc");
  cfg.basename = "kc";

  const RunResult res = run_scenario(cfg);
  CHECK(res.kernel_bound > 0.0);
  CHECK(res.kernel_max_deviation > 0.0);
  CHECK(res.kernel_within_bound);

  const Table t = read_csv(res.csv_path);
  CHECK(t.header == "t1_fs,t2_fs,re_K,im_K,stderr");
  CHECK(t.rows.size() == 11 * 11);
  // diagonal entries estimate amp^2 = 1 closely at n = 200
  for (const std::vector<double>& row : t.rows)
    if (row[0] == row[1]) {
      CHECK(std::abs(row[2] - 1.0) < 1e-6);
      CHECK(std::abs(row[3]) < 1e-12);
    }
}

}  // TEST_SUITE
