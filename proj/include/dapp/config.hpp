#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "dapp/experiments.hpp"

namespace dapp {

inline constexpr int kConfigSchemaVersion = 1;

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The desk-scale tree: an 8x8 PoA grid cut into a height-6 tree (quad split
/// under the root, bisections below), giving 64 leaves.
TreeSpec desk_tree_spec();

struct Config {
  TreeSpec tree = desk_tree_spec();
  ClassTable classes = default_classes();
  std::optional<std::filesystem::path> classesPath;  // where the table came from, if a file
  std::optional<std::filesystem::path> tracePath;    // otherwise the synthetic generator is used
  SynthParams synth;
  SimConfig sim;
  ExperimentPlan plan;

  /// Topology, classes and run settings in one bundle.
  RunContext context() const;
};

/// Throws ConfigError naming the offending key. Relative paths resolve
/// against `baseDir`.
Config parse_config(const nlohmann::json& j, const std::filesystem::path& baseDir = {});
Config load_config(const std::filesystem::path& file);

/// Full echo. Classes are written inline and paths absolute, so the echo
/// parses back to an identical Config from any directory.
nlohmann::json to_json(const Config& c);

bool same_config(const Config& a, const Config& b);

}  // namespace dapp
