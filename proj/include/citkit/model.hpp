#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/detail/text.hpp"

namespace citkit {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(what + " (line " + std::to_string(line) + ", column " +
              std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// One SUT input parameter: a name plus its ordered, distinct level names.
struct Factor {
  std::string name;
  std::vector<std::string> levels;
};

// One full configuration: a level index per factor, in factor order.
using Assignment = std::vector<int>;

// Environment variable a factor is exported under: "CIT_" + uppercased name
// with every non-alphanumeric character replaced by '_'.
inline std::string env_var_name(std::string_view factor_name) {
  std::string out = "CIT_";
  for (char c : factor_name) {
    if (std::isalnum(static_cast<unsigned char>(c)))
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    else
      out += '_';
  }
  return out;
}

// The SUT input model: an ordered list of factors. Factor and level order is
// preserved exactly as given, so indices are stable across the pipeline.
class Model {
 public:
  Model() = default;

  explicit Model(std::vector<Factor> factors) : factors_(std::move(factors)) {
    validate();
    shape_.reserve(factors_.size());
    for (const auto& f : factors_) shape_.push_back(static_cast<int>(f.levels.size()));
  }

  const std::vector<Factor>& factors() const { return factors_; }
  std::size_t factor_count() const { return factors_.size(); }
  const std::vector<int>& shape() const { return shape_; }
  int level_count(std::size_t factor) const { return shape_[factor]; }

  const std::string& factor_name(std::size_t factor) const {
    return factors_[factor].name;
  }

  const std::string& level_name(std::size_t factor, int level) const {
    return factors_[factor].levels[static_cast<std::size_t>(level)];
  }

  std::optional<std::size_t> factor_index(std::string_view name) const {
    for (std::size_t i = 0; i < factors_.size(); ++i)
      if (factors_[i].name == name) return i;
    return std::nullopt;
  }

  std::optional<int> level_index(std::size_t factor, std::string_view name) const {
    const auto& levels = factors_[factor].levels;
    for (std::size_t j = 0; j < levels.size(); ++j)
      if (levels[j] == name) return static_cast<int>(j);
    return std::nullopt;
  }

  bool conforms(const Assignment& a) const {
    if (a.size() != factors_.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i] < 0 || a[i] >= shape_[i]) return false;
    return true;
  }

 private:
  void validate() const {
    if (factors_.empty()) throw Error("model must have at least one factor");
    std::unordered_set<std::string> names;
    std::unordered_map<std::string, std::string> env_names;
    for (const auto& f : factors_) {
      if (!detail::is_valid_name(f.name))
        throw Error("invalid factor name '" + f.name + "'");
      if (!names.insert(f.name).second)
        throw Error("duplicate factor name '" + f.name + "'");
      auto [it, fresh] = env_names.emplace(env_var_name(f.name), f.name);
      if (!fresh)
        throw Error("factors '" + it->second + "' and '" + f.name +
                    "' map to the same environment variable " + it->first);
      if (f.levels.empty())
        throw Error("factor '" + f.name + "' has no levels");
      std::unordered_set<std::string> levels;
      for (const auto& l : f.levels) {
        if (!detail::is_valid_name(l))
          throw Error("invalid level name '" + l + "' in factor '" + f.name + "'");
        if (!levels.insert(l).second)
          throw Error("duplicate level '" + l + "' in factor '" + f.name + "'");
      }
    }
    // Overflow guard: the exhaustive size must fit in a signed 64-bit count.
    std::uint64_t size = 1;
    constexpr auto kMax =
        static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
    for (const auto& f : factors_) {
      const auto v = static_cast<std::uint64_t>(f.levels.size());
      if (size > kMax / v)
        throw Error("exhaustive size of model exceeds 2^63-1");
      size *= v;
    }
  }

  std::vector<Factor> factors_;
  std::vector<int> shape_;
};

namespace detail {

inline Model parse_model_text(std::string_view text) {
  std::vector<Factor> factors;
  std::size_t line_no = 0;
  for (std::string_view raw : split(text, '\n')) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string_view::npos)
      raw = raw.substr(0, hash);
    const std::string_view line = trim(raw);
    if (line.empty()) continue;

    const auto colon = line.find(':');
    if (colon == std::string_view::npos)
      throw ParseError("expected 'factor: level, level, ...'", line_no,
                       raw.find_first_not_of(" \t") + 1);
    Factor factor;
    factor.name = std::string(trim(line.substr(0, colon)));
    if (!is_valid_name(factor.name))
      throw ParseError("invalid factor name '" + factor.name + "'", line_no, 1);
    const std::string_view rest = line.substr(colon + 1);
    if (trim(rest).empty())
      throw ParseError("factor '" + factor.name + "' has no levels", line_no,
                       colon + 2);
    for (std::string_view part : split(rest, ',')) {
      const std::string level(trim(part));
      if (!is_valid_name(level))
        throw ParseError("invalid level name '" + level + "' in factor '" +
                             factor.name + "'",
                         line_no, colon + 2);
      factor.levels.push_back(level);
    }
    factors.push_back(std::move(factor));
  }
  if (factors.empty()) throw ParseError("model file defines no factors", 1, 1);
  return Model(std::move(factors));
}

inline Model model_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("factors") || !j["factors"].is_array())
    throw Error("model JSON must be an object with a 'factors' array");
  std::vector<Factor> factors;
  for (const auto& jf : j["factors"]) {
    Factor factor;
    factor.name = jf.at("name").get<std::string>();
    for (const auto& jl : jf.at("levels"))
      factor.levels.push_back(jl.get<std::string>());
    factors.push_back(std::move(factor));
  }
  return Model(std::move(factors));
}

}  // namespace detail

// Parses either the text grammar (one "name: level, level" per line) or the
// JSON mirror {"factors":[{"name":...,"levels":[...]}]}. Both forms produce
// identical models for equivalent content.
inline Model parse_model(std::string_view text) {
  const std::string_view body = detail::trim(text);
  if (!body.empty() && body.front() == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(std::string("model JSON: ") + e.what(), 1, 1);
    }
    return detail::model_from_json(j);
  }
  return detail::parse_model_text(text);
}

inline std::string serialize_model(const Model& model) {
  std::string out;
  for (const auto& f : model.factors()) {
    out += f.name;
    out += ": ";
    for (std::size_t j = 0; j < f.levels.size(); ++j) {
      if (j) out += ", ";
      out += f.levels[j];
    }
    out += '\n';
  }
  return out;
}

inline nlohmann::json model_to_json(const Model& model) {
  nlohmann::json jf = nlohmann::json::array();
  for (const auto& f : model.factors())
    jf.push_back({{"name", f.name}, {"levels", f.levels}});
  return nlohmann::json{{"factors", std::move(jf)}};
}

// Number of possible full configurations, Π |levels(i)|.
inline std::uint64_t exhaustive_size(const Model& model) {
  std::uint64_t size = 1;
  for (int v : model.shape()) size *= static_cast<std::uint64_t>(v);
  return size;
}

// Number of distinct t-way tuples: Σ over all C(k,t) factor subsets of the
// product of their level counts.
inline std::uint64_t tuple_count(const Model& model, int t) {
  const int k = static_cast<int>(model.factor_count());
  if (t < 1 || t > k)
    throw Error("strength " + std::to_string(t) + " out of range 1.." +
                std::to_string(k));
  const auto& shape = model.shape();
  std::uint64_t total = 0;
  std::vector<int> sub(static_cast<std::size_t>(t));
  for (int i = 0; i < t; ++i) sub[static_cast<std::size_t>(i)] = i;
  for (;;) {
    std::uint64_t prod = 1;
    for (int f : sub) prod *= static_cast<std::uint64_t>(shape[static_cast<std::size_t>(f)]);
    if (total > std::numeric_limits<std::uint64_t>::max() - prod)
      throw Error("tuple count overflows 64 bits");
    total += prod;
    // next combination, lexicographic
    int i = t - 1;
    while (i >= 0 && sub[static_cast<std::size_t>(i)] == k - t + i) --i;
    if (i < 0) break;
    ++sub[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < t; ++j)
      sub[static_cast<std::size_t>(j)] = sub[static_cast<std::size_t>(j - 1)] + 1;
  }
  return total;
}

}  // namespace citkit
