#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/detail/rng.hpp"
#include "citkit/model.hpp"
#include "citkit/tuples.hpp"

namespace citkit {

// A generated t-way test suite: N complete assignments over a model shape.
struct TestSuite {
  std::vector<int> shape;
  int strength = 0;
  std::vector<Assignment> rows;

  std::size_t size() const { return rows.size(); }
};

// Swarm parameters for generate_pso. The paper-facing behaviour depends only
// on full coverage, so these defaults are conventional and overridable.
struct PsoConfig {
  int swarm_size = 40;
  int iterations = 75;
  double inertia_start = 0.9;  // decays linearly to inertia_end
  double inertia_end = 0.4;
  double cognitive = 1.375;
  double social = 1.375;
  std::uint64_t seed = 0;
  // Random candidates drawn when the swarm stalls on a row (see below).
  int candidate_attempts = 50;
};

struct CoverageCheck {
  bool full = false;
  std::uint64_t missing = 0;
};

// True iff every t-way tuple occurs in at least one row, plus the number of
// uncovered tuples. Throws on suite/model shape mismatch.
inline CoverageCheck verify_coverage(const TestSuite& suite, const Model& model,
                                     int t) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  for (const auto& row : suite.rows)
    if (!model.conforms(row))
      throw Error("suite row does not conform to model");
  TupleUniverse universe(model, t);
  TupleSet covered(universe);
  for (const auto& row : suite.rows)
    universe.for_each_rank_of_row(row, [&](std::uint64_t r) { covered.mark(r); });
  return {covered.all_covered(), covered.uncovered_count()};
}

namespace detail {

inline Assignment random_assignment(const std::vector<int>& shape, Rng& rng) {
  Assignment row(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i) row[i] = rng.below(shape[i]);
  return row;
}

inline std::uint64_t new_coverage(const TupleUniverse& universe,
                                  const TupleSet& covered, const Assignment& row) {
  std::uint64_t score = 0;
  universe.for_each_rank_of_row(row, [&](std::uint64_t r) {
    if (!covered.covered(r)) ++score;
  });
  return score;
}

// All assignments in lexicographic order; the unique full-coverage suite when
// t equals the factor count.
inline std::vector<Assignment> exhaustive_rows(const std::vector<int>& shape) {
  std::vector<Assignment> rows;
  Assignment row(shape.size(), 0);
  for (;;) {
    rows.push_back(row);
    int i = static_cast<int>(shape.size()) - 1;
    while (i >= 0) {
      if (++row[static_cast<std::size_t>(i)] < shape[static_cast<std::size_t>(i)]) break;
      row[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return rows;
}

inline void dedup_rows(std::vector<Assignment>& rows) {
  std::set<Assignment> seen;
  std::vector<Assignment> unique;
  unique.reserve(rows.size());
  for (auto& row : rows)
    if (seen.insert(row).second) unique.push_back(std::move(row));
  rows = std::move(unique);
}

// Best of `attempts` random rows forced to contain the first uncovered tuple.
// Guarantees the chosen row covers at least one new tuple, which bounds the
// number of rows any generator emits by the size of the universe.
inline Assignment forced_candidate_row(const TupleUniverse& universe,
                                       const TupleSet& covered, Rng& rng,
                                       int attempts) {
  const Tuple target = universe.tuple_at(covered.first_uncovered());
  Assignment best;
  std::uint64_t best_score = 0;
  for (int c = 0; c < attempts; ++c) {
    Assignment cand = random_assignment(universe.shape(), rng);
    for (std::size_t i = 0; i < target.factors.size(); ++i)
      cand[static_cast<std::size_t>(target.factors[i])] = target.levels[i];
    const std::uint64_t score = new_coverage(universe, covered, cand);
    if (best.empty() || score > best_score ||
        (score == best_score && cand < best)) {
      best = std::move(cand);
      best_score = score;
    }
  }
  return best;
}

inline TestSuite finish_suite(std::vector<int> shape, int t,
                              std::vector<Assignment> rows, const Model& model) {
  dedup_rows(rows);
  TestSuite suite{std::move(shape), t, std::move(rows)};
  if (const auto check = verify_coverage(suite, model, t); !check.full)
    throw Error("internal error: generated suite misses " +
                std::to_string(check.missing) + " tuples");
  return suite;
}

}  // namespace detail

// Greedy one-test-at-a-time generator. Each new row is the best of
// `candidate_attempts` random complete assignments scored by the number of
// not-yet-covered t-tuples it covers; ties go to the lexicographically
// smallest assignment. When no candidate covers anything new, a batch forced
// onto the first uncovered tuple is drawn instead, so every accepted row
// makes progress. Same seed, same suite.
inline TestSuite generate_greedy(const Model& model, int t, std::uint64_t seed,
                                 int candidate_attempts = 50) {
  const int k = static_cast<int>(model.factor_count());
  if (t < 1 || t > k)
    throw Error("strength " + std::to_string(t) + " out of range 1.." +
                std::to_string(k));
  if (candidate_attempts < 1) throw Error("candidate attempts must be >= 1");
  if (t == k)
    return TestSuite{model.shape(), t, detail::exhaustive_rows(model.shape())};

  TupleUniverse universe(model, t);
  TupleSet covered(universe);
  detail::Rng rng(seed);
  std::vector<Assignment> rows;

  while (!covered.all_covered()) {
    Assignment best;
    std::uint64_t best_score = 0;
    for (int c = 0; c < candidate_attempts; ++c) {
      Assignment cand = detail::random_assignment(model.shape(), rng);
      const std::uint64_t score = detail::new_coverage(universe, covered, cand);
      if (best.empty() || score > best_score ||
          (score == best_score && cand < best)) {
        best = std::move(cand);
        best_score = score;
      }
    }
    if (best_score == 0)
      best = detail::forced_candidate_row(universe, covered, rng,
                                          candidate_attempts);
    universe.for_each_rank_of_row(best, [&](std::uint64_t r) { covered.mark(r); });
    rows.push_back(std::move(best));
  }
  return detail::finish_suite(model.shape(), t, std::move(rows), model);
}

namespace detail {

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  std::uint64_t best_score = 0;
};

inline Assignment discretize(const std::vector<double>& position,
                             const std::vector<int>& shape) {
  Assignment row(position.size());
  for (std::size_t i = 0; i < position.size(); ++i) {
    // round half-up, then clamp to a valid level index
    const int level = static_cast<int>(std::floor(position[i] + 0.5));
    row[i] = std::clamp(level, 0, shape[i] - 1);
  }
  return row;
}

}  // namespace detail

// PSO-based generator. The outer loop is the same one-test-at-a-time scheme
// as the greedy generator; the inner loop searches for each row with a
// particle swarm. Particle positions are continuous vectors, one coordinate
// per factor, clamped to [0, levels-1] and rounded to the nearest level for
// fitness evaluation; fitness is the number of newly covered t-tuples. After
// the iteration budget the global best becomes the next row; if the swarm
// found nothing new, a forced candidate batch does (see generate_greedy).
inline TestSuite generate_pso(const Model& model, int t, const PsoConfig& config) {
  const int k = static_cast<int>(model.factor_count());
  if (t < 1 || t > k)
    throw Error("strength " + std::to_string(t) + " out of range 1.." +
                std::to_string(k));
  if (config.swarm_size < 1) throw Error("swarm size must be >= 1");
  if (config.iterations < 1) throw Error("iteration count must be >= 1");
  if (config.candidate_attempts < 1) throw Error("candidate attempts must be >= 1");
  if (!std::isfinite(config.inertia_start) || !std::isfinite(config.inertia_end) ||
      !std::isfinite(config.cognitive) || !std::isfinite(config.social))
    throw Error("PSO coefficients must be finite");
  if (t == k)
    return TestSuite{model.shape(), t, detail::exhaustive_rows(model.shape())};

  const auto& shape = model.shape();
  TupleUniverse universe(model, t);
  TupleSet covered(universe);
  detail::Rng rng(config.seed);
  std::vector<Assignment> rows;

  const auto swarm_size = static_cast<std::size_t>(config.swarm_size);
  std::vector<detail::Particle> swarm(swarm_size);

  while (!covered.all_covered()) {
    std::vector<double> global_best_position;
    std::uint64_t global_best_score = 0;
    bool have_global = false;

    for (auto& p : swarm) {
      p.position.resize(shape.size());
      p.velocity.resize(shape.size());
      for (std::size_t i = 0; i < shape.size(); ++i) {
        const double hi = static_cast<double>(shape[i] - 1);
        p.position[i] = rng.range(0.0, std::nextafter(hi, hi + 1.0));
        p.velocity[i] = rng.range(-hi, std::nextafter(hi, hi + 1.0));
      }
      p.best_position = p.position;
      p.best_score =
          detail::new_coverage(universe, covered, detail::discretize(p.position, shape));
      if (!have_global || p.best_score > global_best_score) {
        global_best_position = p.position;
        global_best_score = p.best_score;
        have_global = true;
      }
    }

    for (int iter = 0; iter < config.iterations; ++iter) {
      const double frac =
          config.iterations > 1
              ? static_cast<double>(iter) / static_cast<double>(config.iterations - 1)
              : 0.0;
      const double inertia =
          config.inertia_start + (config.inertia_end - config.inertia_start) * frac;
      for (auto& p : swarm) {
        for (std::size_t i = 0; i < shape.size(); ++i) {
          const double hi = static_cast<double>(shape[i] - 1);
          double v = inertia * p.velocity[i] +
                     config.cognitive * rng.unit() * (p.best_position[i] - p.position[i]) +
                     config.social * rng.unit() * (global_best_position[i] - p.position[i]);
          v = std::clamp(v, -hi, hi);
          p.velocity[i] = v;
          p.position[i] = std::clamp(p.position[i] + v, 0.0, hi);
        }
        const std::uint64_t score =
            detail::new_coverage(universe, covered, detail::discretize(p.position, shape));
        if (score > p.best_score) {
          p.best_score = score;
          p.best_position = p.position;
        }
        if (score > global_best_score) {
          global_best_score = score;
          global_best_position = p.position;
        }
      }
    }

    Assignment row = global_best_score > 0
                         ? detail::discretize(global_best_position, shape)
                         : detail::forced_candidate_row(universe, covered, rng,
                                                        config.candidate_attempts);
    universe.for_each_rank_of_row(row, [&](std::uint64_t r) { covered.mark(r); });
    rows.push_back(std::move(row));
  }
  return detail::finish_suite(model.shape(), t, std::move(rows), model);
}

// --- suite serialization ---------------------------------------------------
//
// CSV: header row of factor names, one row per test, cells are level names.
// JSON mirror additionally carries the model shape and generation strength.

inline std::string suite_to_csv(const TestSuite& suite, const Model& model) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  std::string out;
  for (std::size_t i = 0; i < model.factor_count(); ++i) {
    if (i) out += ',';
    out += model.factor_name(i);
  }
  out += '\n';
  for (const auto& row : suite.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += model.level_name(i, row[i]);
    }
    out += '\n';
  }
  return out;
}

inline TestSuite suite_from_csv(std::string_view text, const Model& model) {
  std::vector<std::string_view> lines;
  for (auto line : detail::split(text, '\n'))
    if (!detail::trim(line).empty()) lines.push_back(line);
  if (lines.empty()) throw Error("suite CSV is empty");

  const auto header = detail::split(lines[0], ',');
  if (header.size() != model.factor_count())
    throw Error("suite CSV header has " + std::to_string(header.size()) +
                " columns, model has " + std::to_string(model.factor_count()));
  for (std::size_t i = 0; i < header.size(); ++i)
    if (detail::trim(header[i]) != model.factor_name(i))
      throw Error("suite CSV header column '" + std::string(detail::trim(header[i])) +
                  "' does not match factor '" + model.factor_name(i) + "'");

  TestSuite suite{model.shape(), 0, {}};
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto cells = detail::split(lines[n], ',');
    if (cells.size() != model.factor_count())
      throw Error("suite CSV row " + std::to_string(n) + " has " +
                  std::to_string(cells.size()) + " cells");
    Assignment row(model.factor_count());
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const auto level = model.level_index(i, detail::trim(cells[i]));
      if (!level)
        throw Error("unknown level '" + std::string(detail::trim(cells[i])) +
                    "' for factor '" + model.factor_name(i) + "' in suite CSV row " +
                    std::to_string(n));
      row[i] = *level;
    }
    suite.rows.push_back(std::move(row));
  }
  return suite;
}

inline nlohmann::json suite_to_json(const TestSuite& suite, const Model& model) {
  if (suite.shape != model.shape())
    throw Error("suite shape does not match model");
  nlohmann::json factors = nlohmann::json::array();
  for (std::size_t i = 0; i < model.factor_count(); ++i)
    factors.push_back(model.factor_name(i));
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : suite.rows) {
    nlohmann::json jr = nlohmann::json::array();
    for (std::size_t i = 0; i < row.size(); ++i)
      jr.push_back(model.level_name(i, row[i]));
    rows.push_back(std::move(jr));
  }
  return nlohmann::json{{"strength", suite.strength},
                        {"shape", suite.shape},
                        {"factors", std::move(factors)},
                        {"rows", std::move(rows)}};
}

inline TestSuite suite_from_json(const nlohmann::json& j, const Model& model) {
  TestSuite suite{model.shape(), j.value("strength", 0), {}};
  if (j.contains("shape") && j["shape"].get<std::vector<int>>() != model.shape())
    throw Error("suite JSON shape does not match model");
  if (j.contains("factors")) {
    const auto names = j["factors"].get<std::vector<std::string>>();
    if (names.size() != model.factor_count())
      throw Error("suite JSON factor list does not match model");
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] != model.factor_name(i))
        throw Error("suite JSON factor '" + names[i] + "' does not match model");
  }
  for (const auto& jr : j.at("rows")) {
    Assignment row(model.factor_count());
    if (jr.size() != model.factor_count())
      throw Error("suite JSON row has wrong length");
    for (std::size_t i = 0; i < model.factor_count(); ++i) {
      const auto name = jr[i].get<std::string>();
      const auto level = model.level_index(i, name);
      if (!level)
        throw Error("unknown level '" + name + "' for factor '" +
                    model.factor_name(i) + "' in suite JSON");
      row[i] = *level;
    }
    suite.rows.push_back(std::move(row));
  }
  return suite;
}

}  // namespace citkit
