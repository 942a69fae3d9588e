#pragma once

#include "photonic_lab/error.hpp"

#include <nlohmann/json.hpp>

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace photonic_lab::scenario {

const std::vector<std::string>& kinds();

struct Sweep {
  std::string parameter;  // dotted path into `parameters`, e.g. "phc.cavity_length_nm"
  std::vector<double> values;
};

struct Scenario {
  std::string kind;
  nlohmann::json parameters = nlohmann::json::object();
  std::optional<Sweep> sweep;
  std::string output_dir;  // may be empty; the caller then supplies one
  std::string canonical;   // key-sorted compact JSON used for hashing
};

// Throws Error{parse} on malformed text or a non-object document.
Scenario parse(std::string_view text);

// Checks every sweep point before anything runs. Throws Error{validation}.
void validate(const Scenario& s);

struct RunOptions {
  std::string output_dir;  // overrides the scenario's output_dir when non-empty
  int jobs = 1;
  std::function<void(const std::string&)> log;  // progress lines; may be empty
};

struct PointFailure {
  std::size_t index = 0;
  double value = 0.0;
  ErrorCode code = ErrorCode::config;
  std::string message;
};

struct RunReport {
  std::string output_dir;
  std::vector<std::string> outputs;  // relative paths, manifest last
  std::vector<std::string> warnings;
  std::vector<PointFailure> failures;
  std::size_t points = 1;
};

// Validates, computes every point, then writes artifacts and finally manifest.json.
// A run without a sweep rethrows its error and writes nothing; a sweep records failed
// points and throws only when every point failed.
RunReport run(const Scenario& s, const RunOptions& options);

std::string sha256_hex(std::string_view data);

}  // namespace photonic_lab::scenario
