// Brute-force reference implementations used as independent oracles.
//
// Everything here deliberately avoids the library's tuple-ranking machinery:
// factor subsets are enumerated by plain recursion and level combinations by
// an odometer, and coverage is decided by scanning rows directly. Keep it
// slow and obvious.
#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

using Row = std::vector<int>;

// All C(k, t) strictly increasing index subsets, lexicographic.
inline std::vector<std::vector<int>> factor_subsets(int k, int t) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == t) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < k; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

// Every full assignment over `shape`, last factor varying fastest.
inline std::vector<Row> all_assignments(const std::vector<int>& shape) {
  std::vector<Row> out;
  Row row(shape.size(), 0);
  for (;;) {
    out.push_back(row);
    int i = static_cast<int>(shape.size()) - 1;
    while (i >= 0) {
      if (++row[i] < shape[i]) break;
      row[i] = 0;
      --i;
    }
    if (i < 0) break;
  }
  return out;
}

inline std::uint64_t exhaustive_size(const std::vector<int>& shape) {
  std::uint64_t n = 1;
  for (int v : shape) n *= static_cast<std::uint64_t>(v);
  return n;
}

// Number of distinct t-way tuples: sum over subsets of the level products.
inline std::uint64_t tuple_count(const std::vector<int>& shape, int t) {
  std::uint64_t total = 0;
  for (const auto& sub : factor_subsets(static_cast<int>(shape.size()), t)) {
    std::uint64_t prod = 1;
    for (int f : sub) prod *= static_cast<std::uint64_t>(shape[f]);
    total += prod;
  }
  return total;
}

struct MissingTuple {
  std::vector<int> factors;
  std::vector<int> levels;
};

// Scans every tuple of the universe against every row.
inline std::vector<MissingTuple> missing_tuples(const std::vector<Row>& rows,
                                                const std::vector<int>& shape,
                                                int t) {
  std::vector<MissingTuple> missing;
  for (const auto& sub : factor_subsets(static_cast<int>(shape.size()), t)) {
    std::vector<int> levels(sub.size(), 0);
    for (;;) {
      bool covered = false;
      for (const auto& row : rows) {
        bool match = true;
        for (std::size_t i = 0; i < sub.size(); ++i) {
          if (row[static_cast<std::size_t>(sub[i])] != levels[i]) {
            match = false;
            break;
          }
        }
        if (match) {
          covered = true;
          break;
        }
      }
      if (!covered) missing.push_back({sub, levels});
      int i = static_cast<int>(sub.size()) - 1;
      while (i >= 0) {
        if (++levels[static_cast<std::size_t>(i)] <
            shape[static_cast<std::size_t>(sub[static_cast<std::size_t>(i)])])
          break;
        levels[static_cast<std::size_t>(i)] = 0;
        --i;
      }
      if (i < 0) break;
    }
  }
  return missing;
}

inline std::uint64_t covered_count(const std::vector<Row>& rows,
                                   const std::vector<int>& shape, int t) {
  return tuple_count(shape, t) - missing_tuples(rows, shape, t).size();
}

inline bool fully_covers(const std::vector<Row>& rows,
                         const std::vector<int>& shape, int t) {
  return missing_tuples(rows, shape, t).empty();
}

// Rows of `rows` that contain the given (factors, levels) tuple.
inline std::uint64_t rows_containing(const std::vector<Row>& rows,
                                     const std::vector<int>& factors,
                                     const std::vector<int>& levels) {
  std::uint64_t n = 0;
  for (const auto& row : rows) {
    bool match = true;
    for (std::size_t i = 0; i < factors.size(); ++i) {
      if (row[static_cast<std::size_t>(factors[i])] != levels[i]) {
        match = false;
        break;
      }
    }
    if (match) ++n;
  }
  return n;
}

}  // namespace oracle
