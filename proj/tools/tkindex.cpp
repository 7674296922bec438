#include "CLI11.hpp"
#include "tk/scenario.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int fail(int code, const std::string& kind, const std::string& field, const std::string& msg) {
  json e{{"error", kind}, {"message", msg}};
  if (!field.empty()) e["field"] = field;
  std::cerr << e.dump(2) << "\n";
  return code;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

std::pair<std::string, std::vector<double>> parse_sweep(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0) throw tk::ConfigError("--sweep", "expected key=v1,v2,...");
  std::vector<double> values;
  std::stringstream ss(spec.substr(eq + 1));
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw tk::ConfigError("--sweep", "not a number: '" + item + "'");
    }
  }
  return {spec.substr(0, eq), values};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"tkindex: twisted K-theory index scenarios"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir, sweep_spec;
  for (auto& name : tk::subcommands()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " pipeline");
    sub->add_option("--config", config_path, "scenario JSON (defaults when omitted)");
    sub->add_option("--out", out_dir, "report directory (default $REPORT_DIR or .)");
    sub->add_option("--sweep", sweep_spec, "key=v1,v2,v3 with key in resolution, N, eps");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  const std::string sub = app.get_subcommands().front()->get_name();

  if (out_dir.empty()) {
    const char* env = std::getenv("REPORT_DIR");
    out_dir = env && *env ? env : ".";
  }

  tk::ScenarioConfig config;
  std::string parameter;
  std::vector<double> values;
  try {
    if (!config_path.empty()) config = tk::load_config(config_path);
    tk::validate_for(sub, config);
    if (!sweep_spec.empty()) {
      std::tie(parameter, values) = parse_sweep(sweep_spec);
      if (values.size() < 3) throw tk::ConfigError("--sweep", "a sweep needs at least 3 values");
    }
  } catch (const tk::ConfigError& e) {
    return fail(2, "config", e.field, e.what());
  }

  try {
    const fs::path stem = fs::path(out_dir) / config.name;
    bool ok;
    if (parameter.empty()) {
      auto r = tk::run(sub, config);
      fs::create_directories(out_dir);
      write_file(stem.string() + ".report.json", r.to_json().dump(2) + "\n");
      write_file(stem.string() + ".table.csv", tk::table_csv(r));
      ok = r.all_pass();
      for (auto& [k, v] : r.pass) std::cout << (v ? "PASS " : "FAIL ") << k << "\n";
    } else {
      auto s = tk::sweep(sub, config, parameter, values);
      fs::create_directories(out_dir);
      write_file(stem.string() + ".report.json", s.to_json().dump(2) + "\n");
      write_file(stem.string() + ".table.csv", s.csv());
      ok = s.all_pass();
      for (auto& [k, v] : s.slopes) std::cout << "slope " << k << " " << v << "\n";
      for (auto& [k, v] : s.checks) std::cout << (v ? "PASS " : "FAIL ") << k << "\n";
    }
    std::cout << (ok ? "all checks passed" : "some checks failed") << "\n";
    return ok ? 0 : 1;
  } catch (const tk::ConfigError& e) {
    return fail(2, "config", e.field, e.what());
  } catch (const std::exception& e) {
    return fail(1, "computation", "", e.what());
  }
}
