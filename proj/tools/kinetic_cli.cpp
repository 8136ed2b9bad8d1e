#include "kinetic/config.hpp"
#include "kinetic/errors.hpp"
#include "kinetic/experiments.hpp"
#include "kinetic/parallel.hpp"
#include "kinetic/report.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace kinetic;
using nlohmann::json;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheck = 1;
constexpr int kExitConfig = 2;

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string output_dir(const std::string& flag, const ExperimentConfig& cfg) {
  if (!flag.empty()) return flag;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv("KINETIC_OUTPUT_DIR"); env != nullptr && *env != '\0')
    return (std::filesystem::path(env) / to_string(cfg.experiment)).string();
  return (std::filesystem::path("results") / to_string(cfg.experiment)).string();
}

// Runs one parsed config, writes its files and returns the exit code.
int execute(const ExperimentConfig& cfg, const std::string& dir) {
  Timing timing;
  timing.threads = max_threads().load();
  timing.started_at = utc_now();
  const auto t0 = std::chrono::steady_clock::now();
  Report rep = run_experiment(cfg);
  timing.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_report(rep, timing, dir);
  for (const auto& c : rep.checks) std::cout << describe(c) << "\n";
  for (const auto& n : rep.notices) std::cout << "note: " << n << "\n";
  std::cout << "wrote " << dir << "\n";
  if (const CheckRecord* bad = rep.first_failure()) {
    std::cerr << "check failed: " << describe(*bad) << "\n";
    return kExitCheck;
  }
  return kExitPass;
}

json parse_value(const std::string& s) {
  try {
    return json::parse(s);
  } catch (const json::parse_error&) {
    return s;
  }
}

std::vector<std::string> split_values(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinetic boundary-value experiments"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker cap for parallel loops (0 = all cores)")
      ->check(CLI::NonNegativeNumber);

  std::string config_path, out_flag, param, values;
  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "Config JSON")->required();
  run->add_option("-o,--output", out_flag, "Output directory");

  auto* validate = app.add_subcommand("validate", "Parse and validate a config file");
  validate->add_option("config", config_path, "Config JSON")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a config once per value of one parameter");
  sweep->add_option("config", config_path, "Config JSON")->required();
  sweep->add_option("--param", param, "Dotted key, e.g. solver.delta")->required();
  sweep->add_option("--values", values, "Comma-separated values")->required();
  sweep->add_option("-o,--output", out_flag, "Output root directory");

  CLI11_PARSE(app, argc, argv);
  if (threads > 0) max_threads().store(threads);

  try {
    if (*validate) {
      const ExperimentConfig cfg = load_config(config_path);
      std::cout << "valid: " << to_string(cfg.experiment) << "\n";
      return kExitPass;
    }
    if (*run) {
      const ExperimentConfig cfg = load_config(config_path);
      return execute(cfg, output_dir(out_flag, cfg));
    }
    // sweep: validate every variant before running any
    const json base = read_json(config_path);
    std::vector<std::pair<std::string, ExperimentConfig>> variants;
    for (const std::string& v : split_values(values)) {
      json doc = base;
      set_dotted(doc, param, parse_value(v));
      variants.emplace_back(v, parse_config(doc));
    }
    if (variants.empty()) throw ConfigError("--values", "no values given");
    const std::string root = output_dir(out_flag, variants.front().second);
    int code = kExitPass;
    json summary = {{"schema_version", kSchemaVersion}, {"param", param}, {"runs", json::array()}};
    for (auto& [v, cfg] : variants) {
      const std::string dir = (std::filesystem::path(root) / (param + "=" + v)).string();
      std::cout << "== " << param << " = " << v << "\n";
      const int c = execute(cfg, dir);
      summary["runs"].push_back({{"value", parse_value(v)}, {"dir", dir}, {"exit_code", c}});
      code = std::max(code, c);
    }
    std::ofstream(std::filesystem::path(root) / "sweep.json") << summary.dump(2) << "\n";
    return code;
  } catch (const ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheck;
  }
}
