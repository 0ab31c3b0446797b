#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/generator.hpp"
#include "citkit/model.hpp"
#include "citkit/tuples.hpp"

namespace citkit {

// Exact coverage of one strength. The fraction is kept as an integer pair;
// decimals are rendered only at the reporting boundary.
struct StrengthCoverage {
  int strength = 0;
  std::uint64_t covered = 0;
  std::uint64_t total = 0;

  bool full() const { return covered == total; }
  std::string fraction() const {
    return std::to_string(covered) + "/" + std::to_string(total);
  }
  double value() const {
    return static_cast<double>(covered) / static_cast<double>(total);
  }
  std::string decimal() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value());
    return buf;
  }
};

struct CoverageReport {
  std::size_t suite_size = 0;
  std::vector<StrengthCoverage> strengths;
};

// Measures the proportion of s-way tuples a suite covers, for each requested
// strength. Deterministic and exact; row order and duplicates do not matter.
inline CoverageReport measure(const TestSuite& suite, const Model& model,
                              const std::vector<int>& strengths) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  for (const auto& row : suite.rows)
    if (!model.conforms(row))
      throw Error("suite row does not conform to model");

  CoverageReport report;
  report.suite_size = suite.rows.size();
  for (int s : strengths) {
    TupleUniverse universe(model, s);
    TupleSet covered(universe);
    for (const auto& row : suite.rows)
      universe.for_each_rank_of_row(row, [&](std::uint64_t r) { covered.mark(r); });
    report.strengths.push_back({s, covered.covered_count(), covered.size()});
  }
  return report;
}

// All uncovered s-way tuples, sorted by (factor index set, level indices).
// Empty exactly when coverage at s is 1.0.
inline std::vector<Tuple> missing_tuples(const TestSuite& suite, const Model& model,
                                         int s) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  for (const auto& row : suite.rows)
    if (!model.conforms(row))
      throw Error("suite row does not conform to model");

  TupleUniverse universe(model, s);
  TupleSet covered(universe);
  for (const auto& row : suite.rows)
    universe.for_each_rank_of_row(row, [&](std::uint64_t r) { covered.mark(r); });
  std::vector<Tuple> missing;
  for (std::uint64_t r = 0; r < universe.size(); ++r)
    if (!covered.covered(r)) missing.push_back(universe.tuple_at(r));
  return missing;
}

inline nlohmann::json coverage_to_json(const CoverageReport& report) {
  nlohmann::json strengths = nlohmann::json::array();
  for (const auto& sc : report.strengths) {
    strengths.push_back({{"s", sc.strength},
                         {"covered", sc.covered},
                         {"total", sc.total},
                         {"fraction", sc.fraction()},
                         {"decimal", sc.decimal()}});
  }
  return nlohmann::json{{"N", report.suite_size}, {"strengths", std::move(strengths)}};
}

inline std::string coverage_to_table(const CoverageReport& report) {
  std::string out = "N = " + std::to_string(report.suite_size) + "\n";
  out += "  s     covered       total   coverage\n";
  for (const auto& sc : report.strengths) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%3d  %10llu  %10llu     %s\n", sc.strength,
                  static_cast<unsigned long long>(sc.covered),
                  static_cast<unsigned long long>(sc.total), sc.decimal().c_str());
    out += buf;
  }
  return out;
}

}  // namespace citkit
