#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cofine/harness.hpp"

namespace cofine::config {

// Flat `key = value` document ('#' starts a comment). Preserves insertion
// order so serialization is stable.
class KeyValues {
 public:
  static KeyValues parse(std::string_view text);
  static KeyValues parse_file(const std::filesystem::path& path);

  bool has(std::string_view key) const;
  std::string get(std::string_view key) const;  // throws ConfigError if absent
  void set(std::string_view key, std::string_view value);

  const std::vector<std::pair<std::string, std::string>>& items() const {
    return items_;
  }

  std::string serialize() const;

 private:
  std::vector<std::pair<std::string, std::string>> items_;
};

// Parses and validates an experiment description. Unknown keys abort;
// provenance keys written by the manifest (tool_version, artifacts) are
// accepted. Relative profile paths resolve against base_dir.
harness::ExperimentConfig resolve_experiment(
    const KeyValues& kv, const std::filesystem::path& base_dir);

// Full manifest content: every key materialized, plus tool version.
KeyValues materialize(const harness::ExperimentConfig& cfg);

}  // namespace cofine::config
