#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/generator.hpp"
#include "citkit/model.hpp"

namespace citkit {

// One executable validation script. Every configuration in a suite runs
// against every script.
struct VariantScript {
  std::string id;
  std::filesystem::path path;
  std::optional<double> timeout_seconds;

  bool operator==(const VariantScript&) const = default;
};

struct PlanEntry {
  std::size_t test_index = 0;
  Assignment assignment;
  VariantScript script;
};

// The multiplexer output: suite rows crossed with scripts, row-major (all
// scripts for test 0, then test 1, ...). |entries| == N x V always.
struct VariantPlan {
  std::size_t suite_size = 0;
  std::size_t script_count = 0;
  std::vector<PlanEntry> entries;

  std::size_t size() const { return entries.size(); }
};

inline VariantPlan multiplex(const TestSuite& suite,
                             const std::vector<VariantScript>& scripts) {
  if (suite.rows.empty()) throw Error("cannot multiplex an empty suite");
  if (scripts.empty()) throw Error("cannot multiplex an empty script set");
  std::unordered_set<std::string> ids;
  for (const auto& s : scripts) {
    if (s.id.empty()) throw Error("script id must be non-empty");
    if (!ids.insert(s.id).second)
      throw Error("duplicate script id '" + s.id + "'");
  }

  VariantPlan plan;
  plan.suite_size = suite.rows.size();
  plan.script_count = scripts.size();
  plan.entries.reserve(suite.rows.size() * scripts.size());
  for (std::size_t i = 0; i < suite.rows.size(); ++i)
    for (const auto& script : scripts)
      plan.entries.push_back({i, suite.rows[i], script});
  return plan;
}

// Environment a plan entry runs under: one CIT_<FACTOR> variable per factor
// holding the level name verbatim, plus CIT_TEST_INDEX and CIT_VARIANT_ID.
inline std::map<std::string, std::string> environment_for(const Model& model,
                                                          const PlanEntry& entry) {
  std::map<std::string, std::string> env;
  for (std::size_t i = 0; i < model.factor_count(); ++i)
    env[env_var_name(model.factor_name(i))] =
        model.level_name(i, entry.assignment[i]);
  env["CIT_TEST_INDEX"] = std::to_string(entry.test_index);
  env["CIT_VARIANT_ID"] = entry.script.id;
  return env;
}

// Script-set manifest: JSON list [{"id":..., "path":..., "timeout":...}].
// Relative paths are resolved against `base_dir`.
inline std::vector<VariantScript> load_script_manifest(
    const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  if (!j.is_array()) throw Error("script manifest must be a JSON array");
  std::vector<VariantScript> scripts;
  for (const auto& js : j) {
    VariantScript s;
    s.id = js.at("id").get<std::string>();
    std::filesystem::path p = js.at("path").get<std::string>();
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    s.path = p;
    if (js.contains("timeout") && !js["timeout"].is_null())
      s.timeout_seconds = js["timeout"].get<double>();
    scripts.push_back(std::move(s));
  }
  return scripts;
}

// Directory scan alternative: every executable regular file becomes a
// script, id = filename, sorted lexicographically.
inline std::vector<VariantScript> scan_script_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir))
    throw Error("script directory '" + dir.string() + "' does not exist");
  std::vector<VariantScript> scripts;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto perms = entry.status().permissions();
    if ((perms & std::filesystem::perms::owner_exec) ==
        std::filesystem::perms::none)
      continue;
    scripts.push_back({entry.path().filename().string(), entry.path(), {}});
  }
  std::sort(scripts.begin(), scripts.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  return scripts;
}

}  // namespace citkit
