#pragma once

#include <compare>
#include <cstdint>
#include <vector>

#include "citkit/model.hpp"

namespace citkit {

// A t-way combination: t strictly increasing factor indices plus one level
// index per chosen factor.
struct Tuple {
  std::vector<int> factors;
  std::vector<int> levels;

  int strength() const { return static_cast<int>(factors.size()); }

  // True when `row` assigns every chosen factor its tuple level.
  bool contained_in(const Assignment& row) const {
    for (std::size_t i = 0; i < factors.size(); ++i)
      if (row[static_cast<std::size_t>(factors[i])] != levels[i]) return false;
    return true;
  }

  auto operator<=>(const Tuple&) const = default;
};

// Dense ranking of all t-way tuples of a model shape.
//
// Factor subsets are ordered lexicographically and each subset's level
// combinations are ranked in row-major mixed radix, so ascending rank order
// equals ordering by (factor index set, level indices).
class TupleUniverse {
 public:
  TupleUniverse(std::vector<int> shape, int t) : shape_(std::move(shape)), t_(t) {
    const int k = static_cast<int>(shape_.size());
    if (t < 1 || t > k)
      throw Error("strength " + std::to_string(t) + " out of range 1.." +
                  std::to_string(k));
    std::vector<int> sub(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) sub[static_cast<std::size_t>(i)] = i;
    std::uint64_t offset = 0;
    for (;;) {
      subsets_.push_back(sub);
      offsets_.push_back(offset);
      std::uint64_t prod = 1;
      for (int f : sub) prod *= static_cast<std::uint64_t>(shape_[static_cast<std::size_t>(f)]);
      offset += prod;
      int i = t - 1;
      while (i >= 0 && sub[static_cast<std::size_t>(i)] == k - t + i) --i;
      if (i < 0) break;
      ++sub[static_cast<std::size_t>(i)];
      for (int j = i + 1; j < t; ++j)
        sub[static_cast<std::size_t>(j)] = sub[static_cast<std::size_t>(j - 1)] + 1;
    }
    total_ = offset;
  }

  TupleUniverse(const Model& model, int t) : TupleUniverse(model.shape(), t) {}

  int strength() const { return t_; }
  const std::vector<int>& shape() const { return shape_; }
  std::uint64_t size() const { return total_; }
  const std::vector<std::vector<int>>& subsets() const { return subsets_; }

  std::uint64_t index_of(const Tuple& tuple) const {
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
      if (subsets_[s] == tuple.factors) {
        std::uint64_t rank = 0;
        for (std::size_t i = 0; i < tuple.factors.size(); ++i) {
          rank = rank * static_cast<std::uint64_t>(
                            shape_[static_cast<std::size_t>(tuple.factors[i])]) +
                 static_cast<std::uint64_t>(tuple.levels[i]);
        }
        return offsets_[s] + rank;
      }
    }
    throw Error("tuple factors do not form a valid subset for this universe");
  }

  Tuple tuple_at(std::uint64_t index) const {
    std::size_t s = subsets_.size() - 1;
    while (offsets_[s] > index) --s;
    Tuple tuple;
    tuple.factors = subsets_[s];
    tuple.levels.resize(tuple.factors.size());
    std::uint64_t rank = index - offsets_[s];
    for (std::size_t i = tuple.factors.size(); i-- > 0;) {
      const auto v = static_cast<std::uint64_t>(
          shape_[static_cast<std::size_t>(tuple.factors[i])]);
      tuple.levels[i] = static_cast<int>(rank % v);
      rank /= v;
    }
    return tuple;
  }

  // Ranks of all C(k,t) tuples contained in a full assignment.
  template <typename Fn>
  void for_each_rank_of_row(const Assignment& row, Fn&& fn) const {
    for (std::size_t s = 0; s < subsets_.size(); ++s) {
      std::uint64_t rank = 0;
      for (int f : subsets_[s]) {
        rank = rank * static_cast<std::uint64_t>(shape_[static_cast<std::size_t>(f)]) +
               static_cast<std::uint64_t>(row[static_cast<std::size_t>(f)]);
      }
      fn(offsets_[s] + rank);
    }
  }
};

// Covered/uncovered membership over a TupleUniverse.
class TupleSet {
 public:
  explicit TupleSet(const TupleUniverse& universe)
      : bits_(universe.size(), false), covered_(0) {}

  std::uint64_t size() const { return bits_.size(); }
  std::uint64_t covered_count() const { return covered_; }
  std::uint64_t uncovered_count() const { return bits_.size() - covered_; }
  bool all_covered() const { return covered_ == bits_.size(); }
  bool covered(std::uint64_t rank) const { return bits_[rank]; }

  // Returns true when the rank was not covered before.
  bool mark(std::uint64_t rank) {
    if (bits_[rank]) return false;
    bits_[rank] = true;
    ++covered_;
    return true;
  }

  // Smallest uncovered rank; size() when everything is covered.
  std::uint64_t first_uncovered() const {
    for (std::uint64_t i = cursor_; i < bits_.size(); ++i) {
      if (!bits_[i]) {
        cursor_ = i;
        return i;
      }
    }
    cursor_ = bits_.size();
    return bits_.size();
  }

 private:
  std::vector<bool> bits_;
  std::uint64_t covered_;
  mutable std::uint64_t cursor_ = 0;
};

}  // namespace citkit
