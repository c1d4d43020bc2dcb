#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "vsim/scenario.hpp"

namespace {

// The only environment override: worker count. Everything else must come
// from the config file so runs stay reproducible from the artifact echo.
void apply_env_workers(vsim::ScenarioConfig& cfg) {
  const char* env = std::getenv("VSIM_WORKERS");
  if (env == nullptr || *env == '\0') return;
  try {
    size_t used = 0;
    const int w = std::stoi(env, &used);
    if (used != std::string(env).size() || w < 0)
      throw std::invalid_argument("bad");
    cfg.workers = w;
  } catch (const std::exception&) {
    throw std::invalid_argument(std::string("VSIM_WORKERS: not a non-negative "
                                            "integer ('") +
                                env + "')");
  }
}

std::vector<double> parse_value_list(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument("trailing characters");
      values.push_back(v);
    } catch (const std::exception&) {
      throw std::invalid_argument("--values: not a number ('" + item + "')");
    }
  }
  if (values.empty()) throw std::invalid_argument("--values: empty list");
  return values;
}

void print_run(const vsim::RunResult& res) {
  std::cout << "wrote " << res.csv_path << "\n";
  std::cout << "wrote " << res.json_path << "\n";
  std::cout << "runtime_seconds " << res.runtime_seconds << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transient response of a three-level V system to partially "
               "coherent light: stochastic ensembles and first-order forms"};
  app.require_subcommand(1);

  std::string config_path;
  std::string axis;
  std::string values_str;
  std::string preset_name;
  std::string preset_mode;
  std::string preset_out;

  CLI::App* cmd_run = app.add_subcommand("run", "Run a scenario config");
  cmd_run->add_option("config", config_path, "Config file path")->required();

  CLI::App* cmd_sweep =
      app.add_subcommand("sweep", "Re-run a config across values of one key");
  cmd_sweep->add_option("config", config_path, "Config file path")->required();
  cmd_sweep->add_option("--axis", axis, "Config key to vary")->required();
  cmd_sweep->add_option("--values", values_str, "Comma-separated numbers")->required();

  CLI::App* cmd_preset =
      app.add_subcommand("preset", "Write a built-in scenario config");
  cmd_preset->add_option("name", preset_name, "Preset name (pc645)")->required();
  cmd_preset->add_option("--mode", preset_mode, "cw or pulse")->required();
  cmd_preset->add_option("--out", preset_out, "Config file to write")->required();

  CLI::App* cmd_kernel = app.add_subcommand(
      "kernel-check", "Estimate a field correlation kernel and compare "
                      "against the analytic kernel");
  cmd_kernel->add_option("config", config_path, "Config file path")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_run->parsed()) {
      vsim::ScenarioConfig cfg = vsim::parse_config_file(config_path);
      apply_env_workers(cfg);
      print_run(vsim::run_scenario(cfg));
      return 0;
    }
    if (cmd_sweep->parsed()) {
      vsim::ScenarioConfig cfg = vsim::parse_config_file(config_path);
      apply_env_workers(cfg);
      const vsim::SweepResult res =
          vsim::run_sweep(cfg, axis, parse_value_list(values_str));
      std::cout << "wrote " << res.csv_path << "\n";
      std::cout << "wrote " << res.json_path << "\n";
      return 0;
    }
    if (cmd_preset->parsed()) {
      if (preset_name != "pc645")
        throw std::invalid_argument("preset: unknown name '" + preset_name +
                                    "' (available: pc645)");
      const vsim::ScenarioConfig cfg = vsim::preset_pc645(preset_mode);
      std::ofstream out(preset_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + preset_out + "'");
      out << vsim::write_config(cfg);
      std::cout << "wrote " << preset_out << "\n";
      return 0;
    }
    if (cmd_kernel->parsed()) {
      vsim::ScenarioConfig cfg = vsim::parse_config_file(config_path);
      apply_env_workers(cfg);
      const vsim::RunResult res = vsim::kernel_check(cfg);
      print_run(res);
      std::cout << "max_abs_deviation " << res.kernel_max_deviation << "\n";
      std::cout << "amplitude_bound " << res.kernel_bound << "\n";
      std::cout << (res.kernel_within_bound ? "within bound\n" : "OUT OF BOUND\n");
      return res.kernel_within_bound ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
