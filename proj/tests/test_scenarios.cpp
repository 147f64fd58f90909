#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <string>

#include "whf/error.hpp"
#include "whf/scenarios.hpp"

using namespace whf;
namespace fs = std::filesystem;

#ifndef WHF_PRESET_DIR
#error "WHF_PRESET_DIR must point at presets/"
#endif

namespace {

bool any_starts_with(const std::vector<std::string>& v, const std::string& prefix) {
  for (const auto& s : v)
    if (s.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

TEST_CASE("presets validate and survive a JSON round trip") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const auto c = preset(name);
    CHECK(validate(c).empty());
    const Json j = to_json(c);
    CHECK(to_json(config_from_json(j)) == j);
  }
}

TEST_CASE("preset files match the built-in defaults") {
  for (const auto& name : scenario_names()) {
    CAPTURE(name);
    const fs::path p = fs::path(WHF_PRESET_DIR) / (name + ".json");
    REQUIRE(fs::exists(p));
    CHECK(to_json(load_config(p)) == to_json(preset(name)));
  }
}

TEST_CASE("unknown and ill-typed keys name the offending field") {
  Json j = to_json(preset("geodesic"));
  j["time"]["dtt"] = 1.0;
  try {
    config_from_json(j);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    CHECK(std::string(e.what()).find("time.dtt") != std::string::npos);
  }
  j = to_json(preset("geodesic"));
  j["grid"]["n"] = "many";
  CHECK_THROWS_WITH_AS(config_from_json(j), doctest::Contains("grid.n"), Error);
}

TEST_CASE("dotted overrides") {
  Json j = to_json(preset("linear-vlasov"));
  apply_override(j, "time.dt=5e-4");
  apply_override(j, "energy.0.coefficient=-0.5");
  apply_override(j, "name=geodesic");
  const auto c = config_from_json(j);
  CHECK(c.dt == 5e-4);
  CHECK(c.energy[0].coefficient == -0.5);
  CHECK(c.name == "geodesic");
  CHECK_THROWS_AS(apply_override(j, "nope.x=1"), Error);
  CHECK_THROWS_AS(apply_override(j, "time.dt"), Error);
}

TEST_CASE("validation reports every violated field") {
  auto c = preset("geodesic");
  c.dt = -1.0;
  c.n = 2;
  c.T = 0.0;
  const auto v = validate(c);
  CHECK(any_starts_with(v, "time.dt"));
  CHECK(any_starts_with(v, "grid.n"));
  CHECK(any_starts_with(v, "time.T"));

  auto s = preset("schrodinger");
  s.dt = 1e-2;
  CHECK(any_starts_with(validate(s), "time.dt"));

  auto o = preset("geodesic");
  o.oracle.kind = "bridge";
  CHECK(!validate(o).empty());
}

TEST_CASE("an invalid config writes nothing") {
  auto c = preset("geodesic");
  c.dt = 0.0;
  c.output_dir = (fs::temp_directory_path() / "whf_invalid_run").string();
  fs::remove_all(c.output_dir);
  CHECK_THROWS_AS(run(c), Error);
  CHECK(!fs::exists(c.output_dir));
}

TEST_CASE("a short run writes diagnostics, snapshots and a summary") {
  auto c = preset("geodesic");
  c.T = 0.01;
  c.snapshot_stride = 5;
  c.output_dir = (fs::temp_directory_path() / "whf_short_run").string();
  fs::remove_all(c.output_dir);
  const auto r = run(c);
  CHECK(fs::exists(fs::path(c.output_dir) / "diagnostics.csv"));
  CHECK(fs::exists(fs::path(c.output_dir) / "rho_000005.csv"));
  CHECK(fs::exists(fs::path(c.output_dir) / "phi_000010.csv"));
  std::ifstream in(fs::path(c.output_dir) / "summary.json");
  const Json s = Json::parse(in);
  CHECK(s["schema_version"] == kSummarySchemaVersion);
  CHECK(s["time"]["steps"] == 10);
  CHECK(s["mass_error"].get<double>() < 1e-12);
  CHECK(deterministic_part(s) == deterministic_part(r.summary));
  CHECK(!deterministic_part(s).contains("wall_clock_seconds"));
  fs::remove_all(c.output_dir);
}
