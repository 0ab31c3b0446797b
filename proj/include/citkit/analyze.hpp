#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/generator.hpp"
#include "citkit/model.hpp"
#include "citkit/runner.hpp"
#include "citkit/tuples.hpp"

namespace citkit {

// The FAIL evidence of one suite run: (assignment, variant id) pairs.
// ERROR and TIMEOUT records are execution accidents, not configuration
// verdicts, and are excluded on construction.
struct FailureSet {
  int suite_strength = 0;
  std::vector<std::pair<Assignment, std::string>> failures;

  std::size_t size() const { return failures.size(); }
};

inline FailureSet failure_set_from(const TestSuite& suite, const RunReport& report,
                                   const Model& model) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  FailureSet set;
  set.suite_strength = suite.strength;
  for (const auto& rec : report.records) {
    if (rec.verdict != Verdict::Fail) continue;
    if (rec.test_index >= suite.rows.size())
      throw Error("run record test index " + std::to_string(rec.test_index) +
                  " is outside the suite");
    set.failures.emplace_back(suite.rows[rec.test_index], rec.variant_id);
  }
  return set;
}

// A suspicious tuple is tied to the variant it breaks: the same combination
// may fail one validation script and pass another.
struct SuspectTuple {
  std::string variant;
  Tuple tuple;

  auto operator<=>(const SuspectTuple&) const = default;
};

// Consistent-failure rule: for a given variant, a tuple is suspicious iff it
// appears in at least one FAIL entry and in no PASS entry of the report.
inline std::vector<SuspectTuple> suspicious_tuples(const TestSuite& suite,
                                                   const RunReport& report,
                                                   const Model& model, int s) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  const int k = static_cast<int>(model.factor_count());
  if (s < 1 || s > k)
    throw Error("strength " + std::to_string(s) + " out of range 1.." +
                std::to_string(k));

  TupleUniverse universe(model, s);
  struct Evidence {
    std::vector<bool> fail_bits;
    std::vector<bool> pass_bits;
  };
  std::map<std::string, Evidence> by_variant;

  for (const auto& rec : report.records) {
    if (rec.verdict != Verdict::Pass && rec.verdict != Verdict::Fail) continue;
    if (rec.test_index >= suite.rows.size())
      throw Error("run record test index " + std::to_string(rec.test_index) +
                  " is outside the suite");
    auto& ev = by_variant[rec.variant_id];
    if (ev.fail_bits.empty()) {
      ev.fail_bits.assign(universe.size(), false);
      ev.pass_bits.assign(universe.size(), false);
    }
    auto& bits = rec.verdict == Verdict::Fail ? ev.fail_bits : ev.pass_bits;
    universe.for_each_rank_of_row(suite.rows[rec.test_index],
                                  [&](std::uint64_t r) { bits[r] = true; });
  }

  std::vector<SuspectTuple> suspects;
  for (const auto& [variant, ev] : by_variant) {
    for (std::uint64_t r = 0; r < universe.size(); ++r)
      if (ev.fail_bits[r] && !ev.pass_bits[r])
        suspects.push_back({variant, universe.tuple_at(r)});
  }
  return suspects;  // ordered by (variant, factor set, levels)
}

// True iff the failing assignment contains at least one suspect tuple
// registered for its variant.
inline bool explained(const Assignment& assignment, const std::string& variant,
                      const std::vector<SuspectTuple>& suspects) {
  for (const auto& s : suspects)
    if (s.variant == variant && s.tuple.contained_in(assignment)) return true;
  return false;
}

struct AttributionStep {
  int removed_with_strength = 0;
  // Failures left after removing those explained at that strength. Empty
  // when the lower-strength report was absent and the step was skipped.
  std::optional<std::uint64_t> remaining;
};

struct AttributionChainRow {
  int strength = 0;
  std::uint64_t initial = 0;
  std::vector<AttributionStep> steps;  // t-1, then t-2, then t-3; stops at 2
};

struct AttributionReport {
  std::vector<AttributionChainRow> chains;             // ascending strength
  std::map<int, std::vector<SuspectTuple>> suspects;   // per strength used
};

// One suite run per strength; the chain for strength t removes failures
// explained by the (t-1)-, (t-2)- and (t-3)-way runs' suspicious tuples.
struct StrengthRun {
  TestSuite suite;
  RunReport report;
};

inline AttributionReport attribution_chain(const std::map<int, StrengthRun>& runs,
                                           const Model& model) {
  AttributionReport report;
  for (const auto& [s, run] : runs) {
    if (s < 2)
      throw Error("attribution runs start at strength 2, got " + std::to_string(s));
    (void)run;
  }

  for (const auto& [t, run] : runs) {
    AttributionChainRow row;
    row.strength = t;
    FailureSet failures = failure_set_from(run.suite, run.report, model);
    row.initial = failures.size();

    std::vector<std::pair<Assignment, std::string>> surviving = failures.failures;
    for (int s = t - 1; s >= std::max(2, t - 3); --s) {
      AttributionStep step;
      step.removed_with_strength = s;
      const auto lower = runs.find(s);
      if (lower != runs.end()) {
        if (!report.suspects.contains(s))
          report.suspects[s] = suspicious_tuples(lower->second.suite,
                                                 lower->second.report, model, s);
        const auto& suspects = report.suspects[s];
        std::vector<std::pair<Assignment, std::string>> next;
        for (const auto& f : surviving)
          if (!explained(f.first, f.second, suspects)) next.push_back(f);
        surviving = std::move(next);
        step.remaining = surviving.size();
      }
      row.steps.push_back(std::move(step));
    }
    report.chains.push_back(std::move(row));
  }
  return report;
}

// --- report serialization ---------------------------------------------------

inline nlohmann::json suspect_to_json(const SuspectTuple& s, const Model& model) {
  nlohmann::json factors = nlohmann::json::array();
  nlohmann::json levels = nlohmann::json::array();
  for (std::size_t i = 0; i < s.tuple.factors.size(); ++i) {
    factors.push_back(model.factor_name(static_cast<std::size_t>(s.tuple.factors[i])));
    levels.push_back(model.level_name(static_cast<std::size_t>(s.tuple.factors[i]),
                                      s.tuple.levels[i]));
  }
  return nlohmann::json{
      {"variant", s.variant}, {"factors", std::move(factors)}, {"levels", std::move(levels)}};
}

inline nlohmann::json attribution_to_json(const AttributionReport& report,
                                          const Model& model) {
  nlohmann::json chains = nlohmann::json::array();
  for (const auto& row : report.chains) {
    nlohmann::json steps = nlohmann::json::array();
    for (const auto& step : row.steps) {
      nlohmann::json js{{"removed_with_strength", step.removed_with_strength}};
      if (step.remaining)
        js["remaining"] = *step.remaining;
      else
        js["remaining"] = nullptr;
      steps.push_back(std::move(js));
    }
    chains.push_back({{"strength", row.strength},
                      {"initial", row.initial},
                      {"steps", std::move(steps)}});
  }
  nlohmann::json suspects = nlohmann::json::object();
  for (const auto& [s, list] : report.suspects) {
    nlohmann::json js = nlohmann::json::array();
    for (const auto& suspect : list) js.push_back(suspect_to_json(suspect, model));
    suspects[std::to_string(s)] = std::move(js);
  }
  return nlohmann::json{{"schema", "citkit-attribution-v1"},
                        {"chains", std::move(chains)},
                        {"suspects", std::move(suspects)}};
}

// Plain-text table, one column per originating strength, one row per
// removal step.
inline std::string attribution_to_table(const AttributionReport& report) {
  const int width = 10;
  auto cell = [&](const std::string& s) {
    std::string out = s;
    while (static_cast<int>(out.size()) < width) out.insert(out.begin(), ' ');
    return out;
  };

  int max_steps = 0;
  for (const auto& row : report.chains)
    max_steps = std::max(max_steps, static_cast<int>(row.steps.size()));

  std::string out = "                    ";
  for (const auto& row : report.chains)
    out += cell(std::to_string(row.strength) + "-way");
  out += '\n';
  out += "Test cases:         ";
  for (const auto& row : report.chains) out += cell(std::to_string(row.initial));
  out += '\n';
  for (int step = 0; step < max_steps; ++step) {
    char label[32];
    std::snprintf(label, sizeof label, "removing (t-%d)-way ", step + 1);
    out += label;
    for (const auto& row : report.chains) {
      if (step >= static_cast<int>(row.steps.size()))
        out += cell("-");
      else if (!row.steps[static_cast<std::size_t>(step)].remaining)
        out += cell("absent");
      else
        out += cell(std::to_string(
            *row.steps[static_cast<std::size_t>(step)].remaining));
    }
    out += '\n';
  }
  return out;
}

}  // namespace citkit
