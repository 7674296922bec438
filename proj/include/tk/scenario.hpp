#pragma once

#include "json.hpp"

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace tk {

constexpr int kReportSchemaVersion = 1;

// Configuration errors (exit code 2). `field` names the offending key.
struct ConfigError : std::runtime_error {
  std::string field;
  ConfigError(const std::string& field, const std::string& msg) : std::runtime_error(msg), field(field) {}
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::string base = "circle_x_sphere2";
  int resolution = 2;
  int fiber_points = 8;
  int N = 32;
  int u_winding = 1;
  int bundle_degree = 1;
  int symbol_winding = 1;
  double eps = 0.5;
  std::map<std::string, double> tolerances;
  unsigned seed = 1;
};

const std::vector<std::string>& subcommands();
const std::vector<std::string>& base_tags();

// Unknown keys, wrong types and values below their minima throw ConfigError.
ScenarioConfig parse_config(const nlohmann::json& j);
ScenarioConfig load_config(const std::string& path);
nlohmann::json to_json(const ScenarioConfig& c);

// Named tolerances a subcommand checks, with defaults.
std::map<std::string, double> default_tolerances(const std::string& subcommand);
// Rejects tolerance names the subcommand does not check and base tags it
// does not support.
void validate_for(const std::string& subcommand, const ScenarioConfig& c);

struct Report {
  std::string subcommand;
  ScenarioConfig scenario;
  nlohmann::json results = nlohmann::json::object();    // integers, "p/q" rationals, reals
  nlohmann::json residuals = nlohmann::json::object();  // named reals
  std::map<std::string, bool> pass;
  std::map<std::string, double> tolerances_used;
  long runtime_ms = 0;

  bool all_pass() const;
  nlohmann::json to_json() const;
  // (quantity, value) rows of the numeric results and residuals
  std::vector<std::pair<std::string, std::string>> table() const;
};

// Runs one pipeline. Library exceptions propagate (exit code 1 in the CLI).
Report run(const std::string& subcommand, const ScenarioConfig& c);

struct SweepResult {
  std::string parameter;
  std::vector<double> values;
  std::vector<Report> reports;
  std::map<std::string, double> slopes;  // log-log slope of each residual against h (1/value or eps)
  // sweep-level checks: curvature slopes over resolution, the defect slope over
  // eps, a constant Thom index over N
  std::map<std::string, bool> checks;
  bool all_pass() const;
  nlohmann::json to_json() const;
  std::string csv() const;
};
constexpr double kResolutionSweepSlope = 1.5;
// parameter in {resolution, N, eps}; at least 3 values.
SweepResult sweep(const std::string& subcommand, const ScenarioConfig& c, const std::string& parameter,
                  const std::vector<double>& values);

std::string table_csv(const Report& r);

}  // namespace tk
