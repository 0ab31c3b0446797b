#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/model.hpp"
#include "citkit/tuples.hpp"

namespace citkit {

// An always-failing combination planted on one variant script. Stands in for
// the real validation scripts of the case study, whose SUT is not available
// at desk scale.
struct PlantedFault {
  std::string variant;
  Tuple tuple;

  auto operator<=>(const PlantedFault&) const = default;
};

// Fault spec file: JSON list of
// {"variant":..., "factors":[names], "levels":[names]}.
inline std::vector<PlantedFault> faults_from_json(const nlohmann::json& j,
                                                  const Model& model) {
  if (!j.is_array()) throw Error("fault spec must be a JSON array");
  std::vector<PlantedFault> faults;
  for (const auto& jf : j) {
    PlantedFault fault;
    fault.variant = jf.at("variant").get<std::string>();
    const auto factors = jf.at("factors").get<std::vector<std::string>>();
    const auto levels = jf.at("levels").get<std::vector<std::string>>();
    if (factors.empty() || factors.size() != levels.size())
      throw Error("fault tuple must list one level per factor");
    std::vector<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      const auto f = model.factor_index(factors[i]);
      if (!f) throw Error("unknown factor '" + factors[i] + "' in fault spec");
      const auto l = model.level_index(*f, levels[i]);
      if (!l)
        throw Error("unknown level '" + levels[i] + "' for factor '" +
                    factors[i] + "' in fault spec");
      pairs.emplace_back(static_cast<int>(*f), *l);
    }
    std::sort(pairs.begin(), pairs.end());
    for (std::size_t i = 1; i < pairs.size(); ++i)
      if (pairs[i].first == pairs[i - 1].first)
        throw Error("fault tuple repeats factor '" +
                    model.factor_name(static_cast<std::size_t>(pairs[i].first)) + "'");
    for (const auto& [f, l] : pairs) {
      fault.tuple.factors.push_back(f);
      fault.tuple.levels.push_back(l);
    }
    faults.push_back(std::move(fault));
  }
  return faults;
}

inline nlohmann::json faults_to_json(const std::vector<PlantedFault>& faults,
                                     const Model& model) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& fault : faults) {
    nlohmann::json factors = nlohmann::json::array();
    nlohmann::json levels = nlohmann::json::array();
    for (std::size_t i = 0; i < fault.tuple.factors.size(); ++i) {
      factors.push_back(
          model.factor_name(static_cast<std::size_t>(fault.tuple.factors[i])));
      levels.push_back(model.level_name(
          static_cast<std::size_t>(fault.tuple.factors[i]), fault.tuple.levels[i]));
    }
    out.push_back({{"variant", fault.variant},
                   {"factors", std::move(factors)},
                   {"levels", std::move(levels)}});
  }
  return out;
}

// Zero-padded variant ids "001".."NNN"; width grows past 999 scripts.
inline std::string synth_variant_id(int index, int count) {
  int width = 3;
  for (int n = count; n > 999; n /= 10) ++width;
  std::string id = std::to_string(index);
  while (static_cast<int>(id.size()) < width) id.insert(id.begin(), '0');
  return id;
}

// POSIX sh source for one stub: exits 1 iff the environment matches any
// planted tuple assigned to this variant, else 0.
inline std::string stub_script_source(const Model& model,
                                      const std::vector<const PlantedFault*>& faults) {
  std::string src = "#!/bin/sh\n";
  src += "# synthetic configuration check generated by citkit synth\n";
  for (const auto* fault : faults) {
    src += "if ";
    for (std::size_t i = 0; i < fault->tuple.factors.size(); ++i) {
      if (i) src += " && ";
      const auto f = static_cast<std::size_t>(fault->tuple.factors[i]);
      src += "[ \"$" + env_var_name(model.factor_name(f)) + "\" = \"" +
             model.level_name(f, fault->tuple.levels[i]) + "\" ]";
    }
    src += "; then exit 1; fi\n";
  }
  src += "exit 0\n";
  return src;
}

// Writes `count` executable stub scripts into `dir` and returns their ids.
// Fault variant ids must name generated scripts.
inline std::vector<std::string> write_stub_scripts(
    const Model& model, const std::vector<PlantedFault>& faults, int count,
    const std::filesystem::path& dir) {
  if (count < 1) throw Error("script count must be >= 1");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (!std::filesystem::is_directory(dir))
    throw Error("cannot create script directory " + dir.string());

  std::map<std::string, std::vector<const PlantedFault*>> by_variant;
  for (int i = 1; i <= count; ++i) by_variant[synth_variant_id(i, count)];
  for (const auto& fault : faults) {
    const auto it = by_variant.find(fault.variant);
    if (it == by_variant.end())
      throw Error("fault names unknown variant '" + fault.variant + "'");
    if (!model.conforms([&] {
          Assignment probe(model.factor_count(), 0);
          for (std::size_t i = 0; i < fault.tuple.factors.size(); ++i)
            probe[static_cast<std::size_t>(fault.tuple.factors[i])] =
                fault.tuple.levels[i];
          return probe;
        }()))
      throw Error("fault tuple does not conform to model");
    it->second.push_back(&fault);
  }

  std::vector<std::string> ids;
  for (const auto& [id, variant_faults] : by_variant) {
    const auto path = dir / id;
    std::ofstream out(path);
    if (!out) throw Error("cannot write script " + path.string());
    out << stub_script_source(model, variant_faults);
    out.close();
    std::filesystem::permissions(path,
                                 std::filesystem::perms::owner_all |
                                     std::filesystem::perms::group_read |
                                     std::filesystem::perms::group_exec |
                                     std::filesystem::perms::others_read |
                                     std::filesystem::perms::others_exec,
                                 std::filesystem::perm_options::replace);
    ids.push_back(id);
  }
  return ids;
}

}  // namespace citkit
