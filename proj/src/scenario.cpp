#include "vsim/scenario.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "vsim/csv.hpp"
#include "vsim/measures.hpp"
#include "vsim/perturbative.hpp"

namespace vsim {

namespace {

namespace stdfs = std::filesystem;
using nlohmann::json;

constexpr double kPi = std::numbers::pi;

// Effective coupling rate mu*eps0/hbar for a 12.8 Debye transition dipole in
// a 1000 W/m^2 irradiance field: eps0 = sqrt(2 I / (c eps_vac)) = 868.0 V/m,
// so the rate is 3.51434e8 rad/s = 3.51434e-7 rad/fs = 5.59325e-5 THz.
constexpr double kPc645RateThz = 5.59325e-5;

const char* kind_name(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::CwSudden: return "cw_sudden";
    case ScenarioKind::CwTurnonAvg: return "cw_turnon_avg";
    case ScenarioKind::Pulse: return "pulse";
    case ScenarioKind::WhiteNoise: return "white_noise";
    case ScenarioKind::CorrelationCheck: return "correlation_check";
    case ScenarioKind::StationaryF: return "stationary_f";
  }
  return "?";
}

ScenarioKind kind_from(const std::string& name) {
  for (ScenarioKind k : {ScenarioKind::CwSudden, ScenarioKind::CwTurnonAvg,
                         ScenarioKind::Pulse, ScenarioKind::WhiteNoise,
                         ScenarioKind::CorrelationCheck, ScenarioKind::StationaryF})
    if (name == kind_name(k)) return k;
  throw std::invalid_argument(
      "config scenario: unknown value '" + name +
      "' (expected cw_sudden, cw_turnon_avg, pulse, white_noise, "
      "correlation_check or stationary_f)");
}

const char* mode_name(RunMode m) {
  return m == RunMode::Analytic ? "analytic" : "ensemble";
}

RunMode mode_from(const std::string& name) {
  if (name == "analytic") return RunMode::Analytic;
  if (name == "ensemble") return RunMode::Ensemble;
  throw std::invalid_argument("config mode: unknown value '" + name +
                              "' (expected analytic or ensemble)");
}

const char* jump_model_name(JumpModel m) {
  return m == JumpModel::PoissonRate ? "poisson_rate" : "wiener_paper";
}

JumpModel jump_model_from(const std::string& name) {
  if (name == "poisson_rate") return JumpModel::PoissonRate;
  if (name == "wiener_paper") return JumpModel::WienerPaper;
  throw std::invalid_argument("config noise.jump_model: unknown value '" + name +
                              "' (expected poisson_rate or wiener_paper)");
}

std::string fmt_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return std::string(buf);
}

[[noreturn]] void fail_key(const std::string& key, const std::string& why) {
  throw std::invalid_argument("config " + key + ": " + why);
}

}  // namespace

VSystem ScenarioConfig::to_system() const {
  VSystem sys;
  sys.ground_freq = angular(ground_thz);
  sys.excited_freqs = {angular(excited2_thz), angular(excited3_thz)};
  sys.dipole_rates = {angular(rate2_thz), angular(rate3_thz)};
  return sys;
}

FieldSpec ScenarioConfig::to_field_spec() const {
  const double w0 = angular(carrier_thz);
  switch (scenario) {
    case ScenarioKind::CwSudden:
    case ScenarioKind::CwTurnonAvg:
    case ScenarioKind::StationaryF:
      return FieldSpec::cw(w0, amplitude, tau_d_fs, turn_on_fs);
    case ScenarioKind::Pulse:
      return FieldSpec::pulse(w0, amplitude, tau_d_fs, tau_p_fs, t_m_fs);
    case ScenarioKind::WhiteNoise:
      return FieldSpec::white_noise(w0, amplitude, pump_power);
    case ScenarioKind::CorrelationCheck:
      if (field_kind == "cw") return FieldSpec::cw(w0, amplitude, tau_d_fs, turn_on_fs);
      if (field_kind == "pulse")
        return FieldSpec::pulse(w0, amplitude, tau_d_fs, tau_p_fs, t_m_fs);
      fail_key("field.kind", "must be cw or pulse, got '" + field_kind + "'");
  }
  throw std::logic_error("to_field_spec: unhandled scenario");
}

double ScenarioConfig::resolved_step() const {
  if (step_fs > 0.0) return step_fs;
  const double span = t_end_fs - t_start_fs;
  if (!(span > 0.0)) fail_key("grid.t_end_fs", "must exceed grid.t_start_fs");
  double s = span / 200.0;
  const double w32 = angular(excited3_thz) - angular(excited2_thz);
  if (w32 > 0.0) s = std::min(s, 2.0 * kPi / w32 / 40.0);
  const bool samples_field =
      mode == RunMode::Ensemble || scenario == ScenarioKind::CorrelationCheck;
  if (samples_field && tau_d_fs > 0.0) s = std::min(s, tau_d_fs / 20.0);
  if (mode == RunMode::Ensemble) {
    // sampled realizations are linearly interpolated by the integrator, so
    // the grid must resolve the analytic signal's carrier phase; the state's
    // own level phases are handled by the integrator's internal substeps
    const double w0 = std::abs(angular(carrier_thz));
    if (w0 > 0.0) s = std::min(s, 2.0 * kPi / w0 / 40.0);
  }
  return s;
}

std::vector<double> ScenarioConfig::time_grid() const {
  return make_grid(t_start_fs, t_end_fs, resolved_step());
}

std::string ScenarioConfig::resolved_basename() const {
  return basename.empty() ? kind_name(scenario) : basename;
}

void ScenarioConfig::validate() const {
  if (scenario != ScenarioKind::CorrelationCheck) {
    try {
      to_system().validate();
    } catch (const std::exception& e) {
      fail_key("system.*", e.what());
    }
  }
  try {
    integrator.validate();
  } catch (const std::exception& e) {
    fail_key("integrator.carrier_divisor", e.what());
  }
  try {
    noise.validate();
  } catch (const std::exception& e) {
    fail_key("noise.*", e.what());
  }
  if (!(amplitude >= 0.0)) fail_key("field.amplitude", "must be >= 0");
  if (out_dir.empty()) fail_key("output.dir", "must not be empty");

  const bool needs_grid = scenario != ScenarioKind::StationaryF;
  if (needs_grid) {
    if (!(t_end_fs > t_start_fs)) fail_key("grid.t_end_fs", "must exceed grid.t_start_fs");
    if (step_fs < 0.0) fail_key("grid.step_fs", "must be >= 0 (0 selects automatic)");
  }

  switch (scenario) {
    case ScenarioKind::CwSudden:
      if (!(tau_d_fs > 0.0)) fail_key("field.tau_d_fs", "must be > 0 for CW scenarios");
      break;
    case ScenarioKind::CwTurnonAvg:
      if (!(tau_d_fs > 0.0)) fail_key("field.tau_d_fs", "must be > 0 for CW scenarios");
      if (mode != RunMode::Analytic) fail_key("mode", "cw_turnon_avg is analytic-only");
      if (t_start_fs < 10.0 * tau_d_fs)
        fail_key("grid.t_start_fs",
                 "cw_turnon_avg is a long-time form; needs t_start >= 10*tau_d");
      break;
    case ScenarioKind::Pulse:
      if (!(tau_d_fs > 0.0)) fail_key("field.tau_d_fs", "must be > 0 for pulse scenarios");
      if (!(tau_p_fs > 0.0)) fail_key("field.tau_p_fs", "must be > 0 for pulse scenarios");
      if (mode == RunMode::Analytic) {
        if (t_start_fs < t_m_fs + 4.0 * tau_p_fs)
          fail_key("grid.t_start_fs",
                   "analytic pulse rows are valid only after t_m + 4*tau_p");
      } else {
        if (t_start_fs > t_m_fs - 4.0 * tau_p_fs || t_end_fs < t_m_fs + 4.0 * tau_p_fs)
          fail_key("grid.t_start_fs/t_end_fs",
                   "ensemble pulse grid must span [t_m - 4*tau_p, t_m + 4*tau_p]");
      }
      break;
    case ScenarioKind::WhiteNoise:
      if (!(pump_power >= 0.0)) fail_key("field.pump_power", "must be >= 0");
      if (mode != RunMode::Analytic) fail_key("mode", "white_noise is analytic-only");
      break;
    case ScenarioKind::CorrelationCheck: {
      if (field_kind != "cw" && field_kind != "pulse")
        fail_key("field.kind", "must be cw or pulse, got '" + field_kind + "'");
      if (!(tau_d_fs > 0.0)) fail_key("field.tau_d_fs", "must be > 0");
      if (field_kind == "pulse") {
        if (!(tau_p_fs > 0.0)) fail_key("field.tau_p_fs", "must be > 0");
        if (t_start_fs > t_m_fs - 4.0 * tau_p_fs || t_end_fs < t_m_fs + 4.0 * tau_p_fs)
          fail_key("grid.t_start_fs/t_end_fs",
                   "pulse correlation grid must span [t_m - 4*tau_p, t_m + 4*tau_p]");
      }
      if (ensemble_n < 2) fail_key("ensemble.n", "need at least 2 realizations");
      break;
    }
    case ScenarioKind::StationaryF:
      if (tau_d_fs < 0.0) fail_key("field.tau_d_fs", "must be >= 0");
      break;
  }

  if (mode == RunMode::Ensemble) {
    if (scenario != ScenarioKind::CwSudden && scenario != ScenarioKind::Pulse)
      fail_key("mode", "ensemble mode supports cw_sudden and pulse only");
    if (ensemble_n < 2) fail_key("ensemble.n", "need at least 2 realizations");
    if (workers < 0) fail_key("ensemble.workers", "must be >= 0");
  }
}

// ---------------------------------------------------------------------------
// Config text format
// ---------------------------------------------------------------------------

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail_key(key, "not a number ('" + v + "')");
  }
}

long long to_int(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const long long x = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail_key(key, "not an integer ('" + v + "')");
  }
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  try {
    size_t used = 0;
    const unsigned long long x = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    fail_key(key, "not an unsigned integer ('" + v + "')");
  }
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key.empty() || val.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key or value");
    if (!kv.emplace(key, val).second)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": duplicate key '" + key + "'");
  }

  ScenarioConfig cfg;
  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };
  auto num = [&](const char* key, double& dst) {
    if (auto v = take(key)) dst = to_double(key, *v);
  };
  auto inum = [&](const char* key, int& dst) {
    if (auto v = take(key)) dst = static_cast<int>(to_int(key, *v));
  };
  auto text_field = [&](const char* key, std::string& dst) {
    if (auto v = take(key)) dst = *v;
  };

  if (auto v = take("scenario")) cfg.scenario = kind_from(*v);
  else throw std::invalid_argument("config scenario: required key missing");
  if (auto v = take("mode")) cfg.mode = mode_from(*v);

  num("system.ground_thz", cfg.ground_thz);
  num("system.excited2_thz", cfg.excited2_thz);
  num("system.excited3_thz", cfg.excited3_thz);
  num("system.rate2_thz", cfg.rate2_thz);
  num("system.rate3_thz", cfg.rate3_thz);

  text_field("field.kind", cfg.field_kind);
  num("field.carrier_thz", cfg.carrier_thz);
  num("field.amplitude", cfg.amplitude);
  num("field.tau_d_fs", cfg.tau_d_fs);
  num("field.tau_p_fs", cfg.tau_p_fs);
  num("field.t_m_fs", cfg.t_m_fs);
  num("field.turn_on_fs", cfg.turn_on_fs);
  num("field.pump_power", cfg.pump_power);

  num("grid.t_start_fs", cfg.t_start_fs);
  num("grid.t_end_fs", cfg.t_end_fs);
  num("grid.step_fs", cfg.step_fs);

  inum("ensemble.n", cfg.ensemble_n);
  if (auto v = take("ensemble.master_seed"))
    cfg.master_seed = to_u64("ensemble.master_seed", *v);
  inum("ensemble.workers", cfg.workers);

  if (auto v = take("noise.jump_model")) cfg.noise.jump_model = jump_model_from(*v);
  num("noise.drift_d_fs", cfg.noise.drift_coefficient);
  inum("noise.collisions_min", cfg.noise.collision_count_min);
  inum("noise.collisions_max", cfg.noise.collision_count_max);

  inum("integrator.carrier_divisor", cfg.integrator.carrier_divisor);

  text_field("output.dir", cfg.out_dir);
  text_field("output.basename", cfg.basename);

  if (!kv.empty()) {
    std::string unknown;
    for (const auto& [k, v] : kv) {
      if (!unknown.empty()) unknown += ", ";
      unknown += "'" + k + "'";
    }
    throw std::invalid_argument("config: unknown key(s) " + unknown);
  }

  cfg.validate();
  return cfg;
}

ScenarioConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::map<std::string, std::string> config_entries(const ScenarioConfig& cfg) {
  std::map<std::string, std::string> kv;
  kv["scenario"] = kind_name(cfg.scenario);
  kv["mode"] = mode_name(cfg.mode);
  kv["system.ground_thz"] = fmt_exact(cfg.ground_thz);
  kv["system.excited2_thz"] = fmt_exact(cfg.excited2_thz);
  kv["system.excited3_thz"] = fmt_exact(cfg.excited3_thz);
  kv["system.rate2_thz"] = fmt_exact(cfg.rate2_thz);
  kv["system.rate3_thz"] = fmt_exact(cfg.rate3_thz);
  kv["field.kind"] = cfg.field_kind;
  kv["field.carrier_thz"] = fmt_exact(cfg.carrier_thz);
  kv["field.amplitude"] = fmt_exact(cfg.amplitude);
  kv["field.tau_d_fs"] = fmt_exact(cfg.tau_d_fs);
  kv["field.tau_p_fs"] = fmt_exact(cfg.tau_p_fs);
  kv["field.t_m_fs"] = fmt_exact(cfg.t_m_fs);
  kv["field.turn_on_fs"] = fmt_exact(cfg.turn_on_fs);
  kv["field.pump_power"] = fmt_exact(cfg.pump_power);
  kv["grid.t_start_fs"] = fmt_exact(cfg.t_start_fs);
  kv["grid.t_end_fs"] = fmt_exact(cfg.t_end_fs);
  kv["grid.step_fs"] = fmt_exact(cfg.step_fs);
  kv["ensemble.n"] = std::to_string(cfg.ensemble_n);
  kv["ensemble.master_seed"] = std::to_string(cfg.master_seed);
  kv["ensemble.workers"] = std::to_string(cfg.workers);
  kv["noise.jump_model"] = jump_model_name(cfg.noise.jump_model);
  kv["noise.drift_d_fs"] = fmt_exact(cfg.noise.drift_coefficient);
  kv["noise.collisions_min"] = std::to_string(cfg.noise.collision_count_min);
  kv["noise.collisions_max"] = std::to_string(cfg.noise.collision_count_max);
  kv["integrator.carrier_divisor"] = std::to_string(cfg.integrator.carrier_divisor);
  kv["output.dir"] = cfg.out_dir;
  kv["output.basename"] = cfg.resolved_basename();
  return kv;
}

std::string write_config(const ScenarioConfig& cfg) {
  // Keys are emitted in section order (not map order) for readability.
  const char* order[] = {
      "scenario", "mode", "system.ground_thz", "system.excited2_thz",
      "system.excited3_thz", "system.rate2_thz", "system.rate3_thz", "field.kind",
      "field.carrier_thz", "field.amplitude", "field.tau_d_fs", "field.tau_p_fs",
      "field.t_m_fs", "field.turn_on_fs", "field.pump_power", "grid.t_start_fs",
      "grid.t_end_fs", "grid.step_fs", "ensemble.n", "ensemble.master_seed",
      "ensemble.workers", "noise.jump_model", "noise.drift_d_fs",
      "noise.collisions_min", "noise.collisions_max", "integrator.carrier_divisor",
      "output.dir", "output.basename"};
  const std::map<std::string, std::string> kv = config_entries(cfg);
  std::ostringstream out;
  for (const char* key : order) out << key << " = " << kv.at(key) << "\n";
  return out.str();
}

ScenarioConfig preset_pc645(const std::string& mode) {
  ScenarioConfig cfg;
  cfg.ground_thz = 0.0;
  cfg.excited2_thz = 510.0;  // DBV- exciton
  cfg.excited3_thz = 529.0;  // DBV+ exciton
  cfg.carrier_thz = 519.5;   // carrier centered between the levels
  cfg.rate2_thz = kPc645RateThz;
  cfg.rate3_thz = kPc645RateThz;
  cfg.tau_d_fs = 1.32;  // thermal sunlight coherence time
  cfg.amplitude = 1.0;
  cfg.mode = RunMode::Analytic;
  if (mode == "cw") {
    cfg.scenario = ScenarioKind::CwSudden;
    cfg.t_start_fs = 0.0;
    cfg.t_end_fs = 1000.0;
    cfg.basename = "pc645_cw";
  } else if (mode == "pulse") {
    cfg.scenario = ScenarioKind::Pulse;
    cfg.tau_p_fs = 30.0;
    cfg.t_m_fs = 150.0;
    cfg.t_start_fs = 270.0;  // t_m + 4 tau_p: start of the post-pulse regime
    cfg.t_end_fs = 450.0;
    cfg.basename = "pc645_pulse";
  } else {
    throw std::invalid_argument("preset_pc645: mode must be cw or pulse, got '" +
                                mode + "'");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Series computation and artifact writing
// ---------------------------------------------------------------------------

namespace {

struct SeriesData {
  std::vector<double> grid;
  std::vector<DensityMatrix> states;
  bool has_stderr = false;
  std::vector<std::array<double, 4>> se;  // rho22, rho33, re23, im23
};

// First-order states carry no ground-excited coherence: the mean field of
// the phase-diffused ensemble vanishes, so those entries average to zero.
DensityMatrix assemble_first_order(const ExcitedBlock& b) {
  DensityMatrix rho = DensityMatrix::Zero();
  rho(0, 0) = 1.0 - b.pop_i - b.pop_j;
  rho(1, 1) = b.pop_i;
  rho(2, 2) = b.pop_j;
  rho(1, 2) = b.coh_ij;
  rho(2, 1) = std::conj(b.coh_ij);
  return rho;
}

SeriesData compute_series(const ScenarioConfig& cfg) {
  cfg.validate();
  const VSystem sys = cfg.to_system();
  const FieldSpec spec = cfg.to_field_spec();
  SeriesData out;
  out.grid = cfg.time_grid();

  if (cfg.mode == RunMode::Ensemble) {
    const EnsembleResult er =
        ensemble_run(sys, spec, cfg.noise, out.grid, cfg.ensemble_n, cfg.master_seed,
                     cfg.workers, cfg.integrator);
    out.states = er.mean_states;
    out.has_stderr = true;
    out.se.resize(out.grid.size());
    for (size_t g = 0; g < out.grid.size(); ++g)
      out.se[g] = {er.se_rho22[g], er.se_rho33[g], er.se_re23[g], er.se_im23[g]};
    return out;
  }

  out.states.reserve(out.grid.size());
  for (const double t : out.grid) {
    ExcitedBlock blk;
    switch (cfg.scenario) {
      case ScenarioKind::CwSudden: {
        const double since_on = t - spec.turn_on;
        if (since_on >= 0.0) blk = excited_block_cw(sys, spec, since_on);
        break;
      }
      case ScenarioKind::CwTurnonAvg:
        blk = turnon_averaged_block(sys, spec, t);
        break;
      case ScenarioKind::Pulse:
        blk = excited_block_pulse_longtime(sys, spec, t);
        break;
      case ScenarioKind::WhiteNoise:
        blk = white_noise_block(sys, cfg.pump_power * cfg.amplitude * cfg.amplitude, t);
        break;
      default:
        throw std::logic_error("compute_series: scenario has no time series");
    }
    out.states.push_back(assemble_first_order(blk));
  }
  return out;
}

struct SeriesSummary {
  double final_c = std::numeric_limits<double>::quiet_NaN();
  double c_last_above_0p1 = std::numeric_limits<double>::quiet_NaN();
  double slope_pop2 = std::numeric_limits<double>::quiet_NaN();
  double slope_pop3 = std::numeric_limits<double>::quiet_NaN();
};

SeriesSummary summarize(const SeriesData& s, const std::vector<MeasureRecord>& recs) {
  SeriesSummary sum;
  std::vector<double> p2(s.grid.size()), p3(s.grid.size());
  for (size_t k = 0; k < s.grid.size(); ++k) {
    p2[k] = s.states[k](1, 1).real();
    p3[k] = s.states[k](2, 2).real();
    if (!std::isnan(recs[k].c)) {
      sum.final_c = recs[k].c;
      if (recs[k].c >= 0.1) sum.c_last_above_0p1 = s.grid[k];
    }
  }
  const double fit_start = s.grid.front() + 0.5 * (s.grid.back() - s.grid.front());
  sum.slope_pop2 = series_slope(s.grid, p2, fit_start);
  sum.slope_pop3 = series_slope(s.grid, p3, fit_start);
  return sum;
}

std::string artifact_path(const ScenarioConfig& cfg, const std::string& suffix) {
  stdfs::create_directories(cfg.out_dir);
  return (stdfs::path(cfg.out_dir) / (cfg.resolved_basename() + suffix)).string();
}

json json_number_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

json base_summary(const ScenarioConfig& cfg) {
  json j;
  j["scenario"] = kind_name(cfg.scenario);
  j["mode"] = mode_name(cfg.mode);
  j["master_seed"] = cfg.master_seed;
  j["config"] = config_entries(cfg);
  return j;
}

RunResult run_time_series(const ScenarioConfig& cfg,
                          std::chrono::steady_clock::time_point t_begin) {
  const SeriesData s = compute_series(cfg);
  std::vector<MeasureRecord> recs;
  recs.reserve(s.grid.size());
  for (const DensityMatrix& rho : s.states) recs.push_back(measure_state(rho));
  const SeriesSummary sum = summarize(s, recs);

  RunResult res;
  res.csv_path = artifact_path(cfg, ".csv");
  {
    std::ofstream out(res.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + res.csv_path + "'");
    out << "t_fs,rho_gg,rho_22,rho_33,re_rho_23,im_rho_23,C,purity,"
           "excited_purity,stderr_rho22,stderr_rho33,stderr_re23,stderr_im23\n";
    for (size_t k = 0; k < s.grid.size(); ++k) {
      const DensityMatrix& rho = s.states[k];
      out << csv::format(s.grid[k]) << ',' << csv::format(rho(0, 0).real()) << ','
          << csv::format(rho(1, 1).real()) << ',' << csv::format(rho(2, 2).real())
          << ',' << csv::format(rho(1, 2).real()) << ','
          << csv::format(rho(1, 2).imag()) << ',' << csv::format_or_blank(recs[k].c)
          << ',' << csv::format(recs[k].purity) << ','
          << csv::format_or_blank(recs[k].excited_purity);
      for (int c = 0; c < 4; ++c) {
        out << ',';
        if (s.has_stderr) out << csv::format(s.se[k][c]);
      }
      out << '\n';
    }
  }

  res.final_c = sum.final_c;
  res.c_last_above_0p1_fs = sum.c_last_above_0p1;
  res.slope_pop2 = sum.slope_pop2;
  res.slope_pop3 = sum.slope_pop3;
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

  json j = base_summary(cfg);
  j["outputs"]["csv"] = res.csv_path;
  j["rows"] = s.grid.size();
  j["slopes"]["pop2_per_fs"] = json_number_or_null(res.slope_pop2);
  j["slopes"]["pop3_per_fs"] = json_number_or_null(res.slope_pop3);
  j["final_c"] = json_number_or_null(res.final_c);
  j["c_last_above_0p1_fs"] = json_number_or_null(res.c_last_above_0p1_fs);
  j["runtime_seconds"] = res.runtime_seconds;
  res.json_path = artifact_path(cfg, "_summary.json");
  write_json_file(res.json_path, j);
  return res;
}

RunResult run_stationary_f(const ScenarioConfig& cfg,
                           std::chrono::steady_clock::time_point t_begin) {
  const VSystem sys = cfg.to_system();
  const FieldSpec spec = cfg.to_field_spec();
  const StationaryCoherence st = stationary_coherence(sys, spec);
  const double u3 = lorentzian_u(sys.omega_kg(1), spec);

  RunResult res;
  res.csv_path = artifact_path(cfg, ".csv");
  {
    std::ofstream out(res.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + res.csv_path + "'");
    out << "tau_d_fs,f_re,f_im,f_squared,saturation,u_level3\n";
    out << csv::format(cfg.tau_d_fs) << ',' << csv::format(st.f_value.real()) << ','
        << csv::format(st.f_value.imag()) << ',' << csv::format(st.f_squared) << ','
        << csv::format(st.saturation) << ',' << csv::format(u3) << '\n';
  }
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

  json j = base_summary(cfg);
  j["outputs"]["csv"] = res.csv_path;
  j["f_squared"] = st.f_squared;
  j["saturation"] = st.saturation;
  j["u_level3"] = u3;
  j["runtime_seconds"] = res.runtime_seconds;
  res.json_path = artifact_path(cfg, "_summary.json");
  write_json_file(res.json_path, j);
  return res;
}

}  // namespace

RunResult kernel_check(const ScenarioConfig& cfg) {
  const auto t_begin = std::chrono::steady_clock::now();
  cfg.validate();
  if (cfg.scenario != ScenarioKind::CorrelationCheck)
    throw std::invalid_argument("kernel_check: config scenario must be correlation_check");

  const FieldSpec spec = cfg.to_field_spec();
  const std::vector<double> grid = cfg.time_grid();
  const CorrelationEstimate est =
      estimate_kernel(spec, cfg.noise, cfg.ensemble_n, grid, cfg.master_seed, cfg.workers);

  const double bound_amp = 0.05 * cfg.amplitude * cfg.amplitude;
  double max_dev = 0.0, max_se = 0.0;
  long violations = 0;
  const auto g = static_cast<Eigen::Index>(grid.size());
  for (Eigen::Index p = 0; p < g; ++p) {
    for (Eigen::Index q = 0; q < g; ++q) {
      const Complex ref = analytic_kernel(spec, grid[static_cast<size_t>(p)],
                                          grid[static_cast<size_t>(q)]);
      const double dev = std::abs(est.kernel(p, q) - ref);
      max_dev = std::max(max_dev, dev);
      max_se = std::max(max_se, est.std_error(p, q));
      if (dev > std::max(bound_amp, 4.0 * est.std_error(p, q))) ++violations;
    }
  }

  RunResult res;
  res.csv_path = artifact_path(cfg, "_kernel.csv");
  {
    std::ofstream out(res.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + res.csv_path + "'");
    out << "t1_fs,t2_fs,re_K,im_K,stderr\n";
    for (Eigen::Index p = 0; p < g; ++p)
      for (Eigen::Index q = 0; q < g; ++q)
        out << csv::format(grid[static_cast<size_t>(p)]) << ','
            << csv::format(grid[static_cast<size_t>(q)]) << ','
            << csv::format(est.kernel(p, q).real()) << ','
            << csv::format(est.kernel(p, q).imag()) << ','
            << csv::format(est.std_error(p, q)) << '\n';
  }

  res.kernel_max_deviation = max_dev;
  res.kernel_bound = bound_amp;
  res.kernel_within_bound = violations == 0;
  res.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();

  json j = base_summary(cfg);
  j["outputs"]["csv"] = res.csv_path;
  j["n_realizations"] = cfg.ensemble_n;
  j["max_abs_deviation"] = max_dev;
  j["amplitude_bound"] = bound_amp;
  j["max_stderr"] = max_se;
  j["entries_outside_bound"] = violations;
  j["within_bound"] = res.kernel_within_bound;
  j["runtime_seconds"] = res.runtime_seconds;
  res.json_path = artifact_path(cfg, "_kernel_summary.json");
  write_json_file(res.json_path, j);
  return res;
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  const auto t_begin = std::chrono::steady_clock::now();
  cfg.validate();
  switch (cfg.scenario) {
    case ScenarioKind::CorrelationCheck:
      return kernel_check(cfg);
    case ScenarioKind::StationaryF:
      return run_stationary_f(cfg, t_begin);
    default:
      return run_time_series(cfg, t_begin);
  }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

namespace {

struct AxisBinding {
  const char* name;
  std::function<void(ScenarioConfig&, double)> set;
};

const std::vector<AxisBinding>& axis_bindings() {
  static const std::vector<AxisBinding> bindings = {
      {"system.ground_thz", [](ScenarioConfig& c, double v) { c.ground_thz = v; }},
      {"system.excited2_thz", [](ScenarioConfig& c, double v) { c.excited2_thz = v; }},
      {"system.excited3_thz", [](ScenarioConfig& c, double v) { c.excited3_thz = v; }},
      {"system.rate2_thz", [](ScenarioConfig& c, double v) { c.rate2_thz = v; }},
      {"system.rate3_thz", [](ScenarioConfig& c, double v) { c.rate3_thz = v; }},
      {"field.carrier_thz", [](ScenarioConfig& c, double v) { c.carrier_thz = v; }},
      {"field.amplitude", [](ScenarioConfig& c, double v) { c.amplitude = v; }},
      {"field.tau_d_fs", [](ScenarioConfig& c, double v) { c.tau_d_fs = v; }},
      {"field.tau_p_fs", [](ScenarioConfig& c, double v) { c.tau_p_fs = v; }},
      {"field.t_m_fs", [](ScenarioConfig& c, double v) { c.t_m_fs = v; }},
      {"field.turn_on_fs", [](ScenarioConfig& c, double v) { c.turn_on_fs = v; }},
      {"field.pump_power", [](ScenarioConfig& c, double v) { c.pump_power = v; }},
      {"grid.t_start_fs", [](ScenarioConfig& c, double v) { c.t_start_fs = v; }},
      {"grid.t_end_fs", [](ScenarioConfig& c, double v) { c.t_end_fs = v; }},
      {"grid.step_fs", [](ScenarioConfig& c, double v) { c.step_fs = v; }},
      {"ensemble.n",
       [](ScenarioConfig& c, double v) { c.ensemble_n = static_cast<int>(std::llround(v)); }},
      {"ensemble.master_seed",
       [](ScenarioConfig& c, double v) {
         c.master_seed = static_cast<std::uint64_t>(std::llround(v));
       }},
      {"ensemble.workers",
       [](ScenarioConfig& c, double v) { c.workers = static_cast<int>(std::llround(v)); }},
      {"noise.drift_d_fs",
       [](ScenarioConfig& c, double v) { c.noise.drift_coefficient = v; }},
      {"integrator.carrier_divisor",
       [](ScenarioConfig& c, double v) {
         c.integrator.carrier_divisor = static_cast<int>(std::llround(v));
       }},
  };
  return bindings;
}

}  // namespace

std::vector<std::string> sweep_axes() {
  std::vector<std::string> names;
  for (const AxisBinding& b : axis_bindings()) names.push_back(b.name);
  return names;
}

void set_axis(ScenarioConfig& cfg, const std::string& axis, double value) {
  for (const AxisBinding& b : axis_bindings()) {
    if (axis == b.name) {
      b.set(cfg, value);
      return;
    }
  }
  std::string valid;
  for (const std::string& name : sweep_axes()) {
    if (!valid.empty()) valid += ", ";
    valid += name;
  }
  throw std::invalid_argument("sweep: unknown axis '" + axis +
                              "'; valid axes: " + valid);
}

SweepResult run_sweep(const ScenarioConfig& base, const std::string& axis,
                      const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("sweep: need at least one value");
  if (base.scenario == ScenarioKind::CorrelationCheck)
    throw std::invalid_argument("sweep: correlation_check is not sweepable");
  {
    ScenarioConfig probe = base;
    set_axis(probe, axis, values.front());  // validates the axis name up front
  }

  SweepResult res;
  const bool stationary = base.scenario == ScenarioKind::StationaryF;
  // head the table with the swept key itself so the artifact is self-describing
  if (stationary)
    res.columns = {axis, "f_squared", "saturation", "u_level3"};
  else
    res.columns = {axis, "final_c", "c_last_above_0p1_fs", "slope_pop2", "slope_pop3"};

  for (const double v : values) {
    ScenarioConfig cfg = base;
    set_axis(cfg, axis, v);
    cfg.validate();
    if (stationary) {
      const VSystem sys = cfg.to_system();
      const FieldSpec spec = cfg.to_field_spec();
      const StationaryCoherence st = stationary_coherence(sys, spec);
      res.rows.push_back({v, st.f_squared, st.saturation,
                          lorentzian_u(sys.omega_kg(1), spec)});
    } else {
      const SeriesData s = compute_series(cfg);
      std::vector<MeasureRecord> recs;
      recs.reserve(s.grid.size());
      for (const DensityMatrix& rho : s.states) recs.push_back(measure_state(rho));
      const SeriesSummary sum = summarize(s, recs);
      res.rows.push_back(
          {v, sum.final_c, sum.c_last_above_0p1, sum.slope_pop2, sum.slope_pop3});
    }
  }

  res.csv_path = artifact_path(base, "_sweep.csv");
  {
    std::ofstream out(res.csv_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + res.csv_path + "'");
    for (size_t c = 0; c < res.columns.size(); ++c)
      out << (c ? "," : "") << res.columns[c];
    out << '\n';
    for (const auto& row : res.rows) {
      for (size_t c = 0; c < row.size(); ++c)
        out << (c ? "," : "") << csv::format_or_blank(row[c]);
      out << '\n';
    }
  }

  json j = base_summary(base);
  j["axis"] = axis;
  j["values"] = values;
  j["outputs"]["csv"] = res.csv_path;
  res.json_path = artifact_path(base, "_sweep_summary.json");
  write_json_file(res.json_path, j);
  return res;
}

}  // namespace vsim
