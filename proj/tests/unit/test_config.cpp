#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dapp/config.hpp"

using namespace dapp;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(DAPP_SOURCE_DIR) / "configs";

std::string error_of(const json& j, const fs::path& base = {}) {
  try {
    (void)parse_config(j, base);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("defaults") {
  const Config c = parse_config(json{{"schema_version", 1}});
  CHECK(c.sim.protocol.buDelay == 100 * kNanosPerMicro);
  CHECK(c.sim.protocol.pdDelay == 400 * kNanosPerMicro);
  CHECK(c.sim.protocol.fModePeriod == 10 * kNanosPerSecond);
  CHECK(c.sim.delay.bandwidthBitsPerSecond == 10'000'000);
  CHECK(c.sim.delay.propagation == 22 * kNanosPerMicro);
  CHECK(c.sim.costs.migrationCost == 600);
  CHECK(c.classes == default_classes());
  CHECK(build_tree(c.tree).leaves().size() == 64);
}

TEST_CASE("every shipped config validates") {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".json" || e.path().filename() == "snapshot.json") continue;
    CAPTURE(e.path().string());
    CHECK_NOTHROW((void)load_config(e.path()));
    ++n;
  }
  CHECK(n >= 2);
}

TEST_CASE("the echo round-trips") {
  for (const char* name : {"desk.json", "small.json"}) {
    const Config c = load_config(kConfigs / name);
    const Config back = parse_config(to_json(c));
    CHECK(same_config(c, back));
    CHECK(back.classes == c.classes);
    CHECK(back.sim.protocol.buDelay == c.sim.protocol.buDelay);
  }
}

TEST_CASE("class table from a file") {
  const Config c = load_config(kConfigs / "desk.json");
  REQUIRE(c.classesPath);
  CHECK(c.classes == default_classes());
}

TEST_CASE("errors name the problem") {
  CHECK(error_of(json::object()).find("schema_version") != std::string::npos);
  CHECK(error_of(json{{"schema_version", 2}}).find("schema_version") != std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"topolgy", json::object()}}).find("topolgy") != std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"protocol", {{"t_bu_us", -1}}}}).find("protocol.t_bu_us") !=
        std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"protocol", {{"t_bu", 1}}}}).find("protocol.t_bu") != std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"topology", {{"height", 0}}}}).find("topology") != std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"topology", {{"cpu_per_leaf", "x"}}}}).find("wrong type") !=
        std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"workload", {{"synth", {{"rt_ratio", 1.5}}}}}}).find("rt_ratio") !=
        std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"experiment", {{"algorithms", {"greedy"}}}}}).find("algorithms") !=
        std::string::npos);
  CHECK(error_of(json{{"schema_version", 1}, {"costs", {{"migration", -5}}}}).find("costs.migration") !=
        std::string::npos);
}

TEST_CASE("missing files are reported with their path") {
  const fs::path base = fs::temp_directory_path();
  const std::string cls = error_of(json{{"schema_version", 1}, {"classes", "no-such-classes.csv"}}, base);
  CHECK(cls.find((base / "no-such-classes.csv").string()) != std::string::npos);
  const std::string tr = error_of(json{{"schema_version", 1}, {"workload", {{"trace", "nope.csv"}}}}, base);
  CHECK(tr.find("nope.csv") != std::string::npos);
  CHECK_THROWS_AS(load_config(base / "definitely-missing.json"), ConfigError);
}

TEST_CASE("inline classes must cover the synthetic classes") {
  const json j{{"schema_version", 1},
               {"classes", json::array({{{"name", "A"}, {"id", 0}, {"max_levels", 1}, {"beta", {3}}, {"cost", {9}}}})}};
  CHECK(error_of(j).find("class") != std::string::npos);
}
