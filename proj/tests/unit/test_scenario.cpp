#include "doctest.h"
#include "tk/scenario.hpp"

#include <sstream>

using namespace tk;
using nlohmann::json;

namespace {

std::string failing_field(const json& j, const std::string& sub = "grr") {
  try {
    validate_for(sub, parse_config(j));
  } catch (const ConfigError& e) {
    return e.field;
  }
  return "";
}

json stable(json j) {
  j.erase("runtime_ms");
  return j;
}

}  // namespace

TEST_CASE("config parsing and validation") {
  auto c = parse_config(json::object());
  CHECK(c.name == "scenario");
  CHECK(c.base == "circle_x_sphere2");
  CHECK(parse_config(to_json(c)).N == c.N);

  json full = to_json(c);
  full["tolerances"] = {{"trace", 1e-9}};
  CHECK(failing_field(full, "thom-check").empty());

  CHECK(failing_field({{"colour", "red"}}) == "colour");
  CHECK(failing_field({{"N", "32"}}) == "N");
  CHECK(failing_field({{"N", 3}}) == "N");
  CHECK(failing_field({{"resolution", 2.5}}) == "resolution");
  CHECK(failing_field({{"fiber_points", 2}}) == "fiber_points");
  CHECK(failing_field({{"base", "klein_bottle"}}) == "base");
  CHECK(failing_field({{"eps", 1.5}}) == "eps");
  CHECK(failing_field({{"name", "a/b"}}) == "name");
  CHECK(failing_field({{"tolerances", {{"trace", -1}}}}, "thom-check") == "tolerances.trace");
  CHECK(failing_field({{"tolerances", {{"pairing", 1e-3}}}}, "thom-check") == "tolerances.pairing");
  CHECK(failing_field({{"base", "torus2"}}, "dd-class") == "base");
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(default_tolerances("nope"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("grr pipeline reports exact rationals") {
  auto r = run("grr", ScenarioConfig{});
  CHECK(r.all_pass());
  CHECK(r.results["degree4_coefficient"] == "13/12");
  CHECK(r.results["line_coefficient"] == "13");
  CHECK(r.results["todd_coefficients"] == json({"1", "1/2", "1/12"}));
  auto j = r.to_json();
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["all_pass"] == true);
  CHECK(table_csv(r).find("degree4_coefficient,13/12\n") != std::string::npos);
}

TEST_CASE("cech and dd-class pipelines") {
  ScenarioConfig c;
  for (auto& b : base_tags()) {
    c.base = b;
    CAPTURE(b);
    CHECK(run("cech-h", c).all_pass());
  }
  c.base = "circle_x_sphere2";
  auto r = run("dd-class", c);
  CHECK(r.all_pass());
  CHECK(r.results["class_coordinate"].get<int>() == 1);
  c.u_winding = 2;
  c.bundle_degree = -3;
  r = run("dd-class", c);
  CHECK(r.all_pass());
  CHECK(std::abs(r.results["class_coordinate"].get<int>()) == 6);
}

TEST_CASE("reports are deterministic apart from the runtime") {
  ScenarioConfig c;
  c.seed = 7;
  c.symbol_winding = 2;
  auto a = run("family-index", c), b = run("family-index", c);
  CHECK(a.all_pass());
  CHECK(stable(a.to_json()).dump() == stable(b.to_json()).dump());
  CHECK(a.results["toeplitz_traces"]["2"].get<double>() == doctest::Approx(2).epsilon(1e-12));
}

TEST_CASE("thom pipeline and N sweep") {
  ScenarioConfig c;
  c.N = 48;
  auto r = run("thom-check", c);
  CHECK(r.all_pass());
  CHECK(r.results["index"] == 1);

  auto s = sweep("thom-check", c, "N", {32, 64, 128});
  CHECK(s.all_pass());
  CHECK(s.checks.at("constant_index"));
  std::istringstream csv(s.csv());
  std::string header, line;
  std::getline(csv, header);
  CHECK(header.rfind("N,index,", 0) == 0);
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 3);

  CHECK_THROWS_AS(sweep("thom-check", c, "N", {32, 64}), ConfigError);
  CHECK_THROWS_AS(sweep("thom-check", c, "seed", {1, 2, 3}), ConfigError);
  CHECK_THROWS_AS(sweep("thom-check", c, "N", {2, 64, 128}), ConfigError);
}

TEST_CASE("a failing tolerance flips the pass flag") {
  ScenarioConfig c;
  c.tolerances["trace"] = 1e-30;
  auto r = run("thom-check", c);
  CHECK_FALSE(r.pass.at("ground_trace"));
  CHECK_FALSE(r.all_pass());
  CHECK(r.tolerances_used.at("trace") == 1e-30);
}
