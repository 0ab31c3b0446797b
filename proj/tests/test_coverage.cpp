#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "citkit/coverage.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using citkit::generate_greedy;
using citkit::measure;
using citkit::missing_tuples;
using citkit::Model;
using citkit::TestSuite;

namespace {

TestSuite exhaustive_suite(const Model& model) {
  TestSuite suite{model.shape(), static_cast<int>(model.factor_count()), {}};
  for (auto& row : oracle::all_assignments(model.shape()))
    suite.rows.push_back(std::move(row));
  return suite;
}

}  // namespace

TEST_CASE("exhaustive suite measures 1.0 at every strength", "[coverage]") {
  const Model model = testutil::qemu_model();
  const auto report = measure(exhaustive_suite(model), model, {1, 2, 3, 4, 5});
  REQUIRE(report.suite_size == 200);
  for (const auto& sc : report.strengths) {
    CHECK(sc.full());
    CHECK(sc.fraction() == std::to_string(sc.total) + "/" + std::to_string(sc.total));
    CHECK(sc.decimal() == "1.0000");
  }
}

TEST_CASE("a full 2-way suite measures 1.0 at s=2 and N/200 at s=5", "[coverage]") {
  const Model model = testutil::qemu_model();
  const TestSuite suite = generate_greedy(model, 2, 17);
  const auto report = measure(suite, model, {2, 5});
  REQUIRE(report.strengths.size() == 2);
  CHECK(report.strengths[0].full());
  // each distinct full row covers exactly one 5-tuple
  CHECK(report.strengths[1].covered == suite.rows.size());
  CHECK(report.strengths[1].total == 200);
}

TEST_CASE("missing_tuples basics", "[coverage]") {
  const Model model = testutil::qemu_model();
  SECTION("exhaustive suite misses nothing") {
    for (int s = 1; s <= 5; ++s)
      CHECK(missing_tuples(exhaustive_suite(model), model, s).empty());
  }
  SECTION("empty suite misses all 16 1-way tuples") {
    const TestSuite empty{model.shape(), 0, {}};
    CHECK(missing_tuples(empty, model, 1).size() == 16);
  }
  SECTION("exhaustive minus one row misses exactly that 5-tuple") {
    TestSuite suite = exhaustive_suite(model);
    const citkit::Assignment removed = suite.rows[57];
    suite.rows.erase(suite.rows.begin() + 57);
    const auto missing = missing_tuples(suite, model, 5);
    REQUIRE(missing.size() == 1);
    CHECK(missing[0].factors == std::vector<int>{0, 1, 2, 3, 4});
    CHECK(missing[0].levels == removed);
    for (int s = 1; s <= 4; ++s)
      CHECK(missing_tuples(suite, model, s).empty());
  }
}

TEST_CASE("missing tuples are sorted and consistent with measure",
          "[coverage][property]") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 10; ++trial) {
    const Model model = testutil::random_model(rng, 4, 4, 256);
    const int k = static_cast<int>(model.factor_count());
    TestSuite suite{model.shape(), 0, {}};
    const std::size_t rows = rng() % 12;
    for (std::size_t i = 0; i < rows; ++i) {
      citkit::Assignment row(model.factor_count());
      for (std::size_t f = 0; f < model.factor_count(); ++f)
        row[f] = static_cast<int>(rng() % static_cast<unsigned>(model.shape()[f]));
      suite.rows.push_back(std::move(row));
    }
    for (int s = 1; s <= k; ++s) {
      const auto missing = missing_tuples(suite, model, s);
      CHECK(std::is_sorted(missing.begin(), missing.end()));
      const auto report = measure(suite, model, {s});
      CHECK(report.strengths[0].covered ==
            report.strengths[0].total - missing.size());
      // brute-force oracle agreement
      const auto expected = oracle::missing_tuples(suite.rows, model.shape(), s);
      REQUIRE(missing.size() == expected.size());
      for (std::size_t i = 0; i < missing.size(); ++i) {
        CHECK(missing[i].factors == expected[i].factors);
        CHECK(missing[i].levels == expected[i].levels);
      }
    }
  }
}

TEST_CASE("measure is invariant under row permutation and duplication",
          "[coverage][property]") {
  std::mt19937_64 rng(77);
  const Model model = testutil::qemu_model();
  const TestSuite suite = generate_greedy(model, 2, 5);
  const auto baseline = measure(suite, model, {1, 2, 3, 4, 5});

  TestSuite shuffled = suite;
  std::shuffle(shuffled.rows.begin(), shuffled.rows.end(), rng);
  shuffled.rows.push_back(shuffled.rows.front());  // duplicate a row
  shuffled.rows.push_back(shuffled.rows.back());
  const auto mutated = measure(shuffled, model, {1, 2, 3, 4, 5});

  REQUIRE(mutated.strengths.size() == baseline.strengths.size());
  for (std::size_t i = 0; i < baseline.strengths.size(); ++i) {
    CHECK(mutated.strengths[i].covered == baseline.strengths[i].covered);
    CHECK(mutated.strengths[i].total == baseline.strengths[i].total);
  }
}

TEST_CASE("coverage report serialization", "[coverage]") {
  const Model model = testutil::qemu_model();
  const TestSuite suite = generate_greedy(model, 2, 17);
  const auto report = measure(suite, model, {2, 5});
  const auto j = citkit::coverage_to_json(report);
  CHECK(j["N"] == suite.rows.size());
  CHECK(j["strengths"][0]["s"] == 2);
  CHECK(j["strengths"][0]["covered"] == 97);
  CHECK(j["strengths"][0]["total"] == 97);
  CHECK(j["strengths"][0]["fraction"] == "97/97");
  CHECK(j["strengths"][1]["fraction"] ==
        std::to_string(suite.rows.size()) + "/200");
  const std::string table = citkit::coverage_to_table(report);
  CHECK(table.find("N = " + std::to_string(suite.rows.size())) != std::string::npos);
  CHECK(table.find("1.0000") != std::string::npos);
}

TEST_CASE("measure rejects shape mismatch", "[coverage]") {
  const Model model = testutil::qemu_model();
  TestSuite wrong{{2, 2}, 2, {{0, 0}}};
  CHECK_THROWS_AS(measure(wrong, model, {1}), citkit::Error);
  CHECK_THROWS_AS(missing_tuples(wrong, model, 1), citkit::Error);
}
