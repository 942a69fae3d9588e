// photonic-lab command-line front end. Talks to the library only through the C API.
#include "photonic_lab/photonic_lab.h"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitUsage = 64;

int exit_code_for(pl_status s) {
  switch (s) {
    case PL_OK: return 0;
    case PL_ERR_PARSE: return 2;
    case PL_ERR_VALIDATION: return 3;
    case PL_ERR_INSTABILITY: return 4;
    default: return 1;
  }
}

int report_error(const std::string& code, const std::string& message, int exit_code) {
  const nlohmann::json doc = {{"error", {{"code", code}, {"message", message}, {"exit_code", exit_code}}}};
  std::cerr << doc.dump() << '\n';
  return exit_code;
}

int report_status(pl_status s) {
  return report_error(pl_status_name(s), pl_last_error_message(), exit_code_for(s));
}

struct ScenarioDeleter {
  void operator()(pl_scenario* s) const { pl_scenario_destroy(s); }
};
struct ResultDeleter {
  void operator()(pl_run_result* r) const { pl_run_result_destroy(r); }
};
using ScenarioPtr = std::unique_ptr<pl_scenario, ScenarioDeleter>;
using ResultPtr = std::unique_ptr<pl_run_result, ResultDeleter>;

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Loads and parses; on failure prints the error and returns the exit code through `exit_code`.
ScenarioPtr load(const std::string& path, int& exit_code) {
  const auto text = read_file(path);
  if (!text) {
    exit_code = report_error("io", "cannot read scenario file " + path, 1);
    return nullptr;
  }
  pl_scenario* raw = nullptr;
  const pl_status s = pl_scenario_parse(text->c_str(), &raw);
  if (s != PL_OK) {
    exit_code = report_status(s);
    return nullptr;
  }
  return ScenarioPtr(raw);
}

std::optional<int> jobs_from_env() {
  const char* v = std::getenv("PHOTONIC_LAB_THREADS");
  if (!v || !*v) return std::nullopt;
  try {
    std::size_t used = 0;
    const int n = std::stoi(v, &used);
    if (used == std::string(v).size() && n >= 1) return n;
  } catch (const std::exception&) {
  }
  return -1;
}

void log_to_stderr(const char* line, void*) { std::fprintf(stderr, "%s\n", line); }

int cmd_validate(const std::string& path) {
  int code = 0;
  auto sc = load(path, code);
  if (!sc) return code;
  const pl_status s = pl_scenario_validate(sc.get());
  if (s != PL_OK) return report_status(s);
  const nlohmann::json doc = {
      {"valid", true}, {"kind", pl_scenario_kind(sc.get())}, {"points", pl_scenario_point_count(sc.get())}};
  std::cout << doc.dump() << '\n';
  return 0;
}

int cmd_run(const std::string& path, std::optional<int> jobs_flag, const std::string& output_dir, bool verbose) {
  int jobs = 1;
  if (jobs_flag) {
    jobs = *jobs_flag;
  } else if (const auto env = jobs_from_env()) {
    if (*env < 1) return report_error("usage", "PHOTONIC_LAB_THREADS must be a positive integer", kExitUsage);
    jobs = *env;
  }

  int code = 0;
  auto sc = load(path, code);
  if (!sc) return code;

  pl_run_options opts{};
  opts.output_dir = output_dir.empty() ? nullptr : output_dir.c_str();
  opts.jobs = jobs;
  opts.log = verbose ? log_to_stderr : nullptr;
  pl_run_result* raw = nullptr;
  const pl_status s = pl_scenario_run(sc.get(), &opts, &raw);
  if (s != PL_OK) return report_status(s);
  ResultPtr result(raw);

  nlohmann::json outputs = nlohmann::json::array();
  for (size_t i = 0; i < pl_run_result_output_count(raw); ++i) outputs.push_back(pl_run_result_output(raw, i));
  nlohmann::json warnings = nlohmann::json::array();
  for (size_t i = 0; i < pl_run_result_warning_count(raw); ++i) warnings.push_back(pl_run_result_warning(raw, i));
  nlohmann::json failures = nlohmann::json::array();
  for (size_t i = 0; i < pl_run_result_failure_count(raw); ++i) {
    size_t point = 0;
    pl_status fc = PL_OK;
    const char* msg = nullptr;
    if (pl_run_result_failure(raw, i, &point, &fc, &msg) == PL_OK)
      failures.push_back({{"point", point}, {"code", pl_status_name(fc)}, {"message", msg}});
  }
  const nlohmann::json doc = {{"output_dir", pl_run_result_output_dir(raw)},
                              {"outputs", outputs},
                              {"warnings", warnings},
                              {"failures", failures}};
  std::cout << doc.dump() << '\n';
  return 0;
}

int cmd_list_kinds() {
  for (size_t i = 0; i < pl_kind_count(); ++i) std::cout << pl_kind_name(i) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"photonic-lab: integrated photonics modelling toolkit"};
  app.set_version_flag("--version", pl_version());
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<int> jobs;
  std::string output_dir;
  bool verbose = false;

  auto* run = app.add_subcommand("run", "Run a scenario and write its artifacts");
  run->add_option("scenario", scenario_path, "Scenario JSON file")->required();
  run->add_option("--jobs,-j", jobs, "Worker threads (default: PHOTONIC_LAB_THREADS or 1)")
      ->check(CLI::PositiveNumber);
  run->add_option("--output-dir,-o", output_dir, "Output directory (overrides the scenario's output_dir)");
  run->add_flag("--verbose,-v", verbose, "Progress on stderr");

  auto* validate = app.add_subcommand("validate", "Parse and validate a scenario without running it");
  validate->add_option("scenario", scenario_path, "Scenario JSON file")->required();

  auto* list = app.add_subcommand("list-kinds", "Print the supported scenario kinds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (*run) return cmd_run(scenario_path, jobs, output_dir, verbose);
  if (*validate) return cmd_validate(scenario_path);
  if (*list) return cmd_list_kinds();
  return kExitUsage;
}
