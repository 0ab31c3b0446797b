#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "citkit/runner.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using citkit::multiplex;
using citkit::RunOptions;
using citkit::RunReport;
using citkit::TestSuite;
using citkit::VariantScript;
using citkit::Verdict;

namespace {

std::size_t count_occurrences(const std::string& haystack, const std::string& needle) {
  std::size_t count = 0;
  for (auto pos = haystack.find(needle); pos != std::string::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++count;
  return count;
}

TestSuite small_suite(const citkit::Model& model, std::size_t rows) {
  TestSuite suite{model.shape(), 1, {}};
  auto all = oracle::all_assignments(model.shape());
  suite.rows.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(rows));
  return suite;
}

std::vector<Verdict> verdicts(const RunReport& report) {
  std::vector<Verdict> out;
  for (const auto& rec : report.records) out.push_back(rec.verdict);
  return out;
}

}  // namespace

TEST_CASE("exit 0 scripts all PASS", "[runner]") {
  testutil::TempDir dir("pass");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(dir.path(), "ok.sh", "exit 0");
  const auto plan = multiplex(small_suite(model, 3), {{"ok", script, {}}});

  const auto report = citkit::run(plan, model, {.work_dir = dir.path() / "work"});
  REQUIRE(report.records.size() == 3);
  CHECK(report.totals.passed == 3);
  for (const auto& rec : report.records) {
    CHECK(rec.verdict == Verdict::Pass);
    CHECK(rec.exit_code == 0);
    CHECK(rec.scratch_dir.empty());  // cleaned up on PASS
  }
  CHECK(citkit::exit_code_for(report) == 0);
}

TEST_CASE("nonzero exit is FAIL with the code recorded", "[runner]") {
  testutil::TempDir dir("fail");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(dir.path(), "bad.sh", "echo broken >&2\nexit 1");
  const auto plan = multiplex(small_suite(model, 1), {{"bad", script, {}}});

  const auto report = citkit::run(plan, model, {.work_dir = dir.path() / "work"});
  REQUIRE(report.records.size() == 1);
  const auto& rec = report.records[0];
  CHECK(rec.verdict == Verdict::Fail);
  CHECK(rec.exit_code == 1);
  CHECK(rec.stderr_bytes > 0);
  // failure evidence is retained
  CHECK_FALSE(rec.scratch_dir.empty());
  CHECK(std::filesystem::exists(std::filesystem::path(rec.scratch_dir) / "stderr.log"));
  CHECK(citkit::exit_code_for(report) == 1);
}

TEST_CASE("planted 2-way fault fails exactly 20 of 200 runs", "[runner]") {
  testutil::TempDir dir("planted");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(
      dir.path(), "check.sh",
      "if [ \"$CIT_IMG_FORMAT\" = \"luks\" ] && [ \"$CIT_IMG_PROTOCOL\" = \"nbd\" ]; "
      "then exit 1; fi\nexit 0");
  const auto plan = multiplex(small_suite(model, 200), {{"check", script, {}}});

  const auto report =
      citkit::run(plan, model, {.parallelism = 8, .work_dir = dir.path() / "work"});
  // brute-force prediction: 200 * (1/5) * (1/2) = 20 assignments hit the tuple
  const auto rows = oracle::all_assignments(model.shape());
  REQUIRE(oracle::rows_containing(rows, {0, 1}, {3, 1}) == 20);
  CHECK(report.totals.failed == 20);
  CHECK(report.totals.passed == 180);
}

TEST_CASE("verdicts are independent of parallelism", "[runner]") {
  testutil::TempDir dir("par");
  const auto model = testutil::qemu_model();
  // deterministic mix of exit codes driven by the configuration
  const auto script = testutil::write_script(
      dir.path(), "mix.sh",
      "case \"$CIT_CACHE_MODE\" in\n"
      "  none) exit 0;;\n  writeback) exit 1;;\n  writethrough) exit 2;;\n"
      "  *) exit 0;;\nesac");
  const auto suite = small_suite(model, 40);
  const auto plan = multiplex(suite, {{"mix", script, {}}});

  const auto serial =
      citkit::run(plan, model, {.parallelism = 1, .work_dir = dir.path() / "w1"});
  const auto parallel =
      citkit::run(plan, model, {.parallelism = 8, .work_dir = dir.path() / "w8"});
  CHECK(verdicts(serial) == verdicts(parallel));
  CHECK(serial.totals == parallel.totals);
  for (std::size_t i = 0; i < serial.records.size(); ++i) {
    CHECK(serial.records[i].test_index == parallel.records[i].test_index);
    CHECK(serial.records[i].exit_code == parallel.records[i].exit_code);
  }
}

TEST_CASE("PASS iff exit code zero across codes 0..5", "[runner][property]") {
  testutil::TempDir dir("codes");
  const auto model = citkit::parse_model("code: 0, 1, 2, 3, 4, 5");
  const auto script = testutil::write_script(dir.path(), "code.sh", "exit \"$CIT_CODE\"");
  TestSuite suite{model.shape(), 1, {{0}, {1}, {2}, {3}, {4}, {5}}};
  const auto plan = multiplex(suite, {{"code", script, {}}});

  const auto report = citkit::run(plan, model, {.work_dir = dir.path() / "work"});
  REQUIRE(report.records.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    REQUIRE(report.records[i].exit_code.has_value());
    CHECK(*report.records[i].exit_code == static_cast<int>(i));
    CHECK(report.records[i].verdict ==
          (i == 0 ? Verdict::Pass : Verdict::Fail));
  }
}

TEST_CASE("missing script yields ERROR and the run continues", "[runner]") {
  testutil::TempDir dir("missing");
  const auto model = testutil::qemu_model();
  const auto good = testutil::write_script(dir.path(), "good.sh", "exit 0");
  const auto plan = multiplex(small_suite(model, 2),
                              {{"gone", dir.path() / "nonexistent.sh", {}},
                               {"good", good, {}}});

  const auto report = citkit::run(plan, model, {.work_dir = dir.path() / "work"});
  REQUIRE(report.records.size() == 4);
  CHECK(report.totals.errored == 2);
  CHECK(report.totals.passed == 2);
  CHECK(report.records[0].verdict == Verdict::Error);
  CHECK_FALSE(report.records[0].exit_code.has_value());
  CHECK(report.records[0].detail.find("not found") != std::string::npos);
  CHECK(citkit::exit_code_for(report) == 2);
}

TEST_CASE("timeout kills the script and records TIMEOUT", "[runner]") {
  testutil::TempDir dir("timeout");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(dir.path(), "slow.sh", "sleep 30\nexit 0");
  const auto plan = multiplex(small_suite(model, 1), {{"slow", script, {}}});

  const auto report = citkit::run(
      plan, model,
      {.default_timeout_seconds = 0.2, .work_dir = dir.path() / "work"});
  REQUIRE(report.records.size() == 1);
  CHECK(report.records[0].verdict == Verdict::Timeout);
  CHECK_FALSE(report.records[0].exit_code.has_value());
  CHECK(report.records[0].duration_seconds < 5.0);  // not the full sleep
  CHECK(citkit::exit_code_for(report) == 2);
}

TEST_CASE("per-script timeout overrides the default", "[runner]") {
  testutil::TempDir dir("timeout2");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(dir.path(), "slow.sh", "sleep 30");
  const auto plan =
      multiplex(small_suite(model, 1), {{"slow", script, 0.2}});
  const auto report = citkit::run(
      plan, model,
      {.default_timeout_seconds = 3600.0, .work_dir = dir.path() / "work"});
  CHECK(report.records[0].verdict == Verdict::Timeout);
}

TEST_CASE("TAP output frames records in plan order", "[runner]") {
  testutil::TempDir dir("tap");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(
      dir.path(), "one.sh",
      "if [ \"$CIT_TEST_INDEX\" = \"1\" ]; then exit 1; fi\nexit 0");
  const auto plan = multiplex(small_suite(model, 3), {{"one", script, {}}});
  const auto report = citkit::run(plan, model, {.work_dir = dir.path() / "work"});
  REQUIRE(report.totals.failed == 1);

  const std::string tap = citkit::report_to_tap(report);
  CHECK(tap.starts_with("TAP version 13\n"));
  CHECK(tap.find("1..3\n") != std::string::npos);
  CHECK(count_occurrences(tap, "not ok") == 1);
  CHECK(tap.find("not ok 2 - t1-one FAIL exit=1") != std::string::npos);
}

TEST_CASE("TAP diagnostics for ERROR and TIMEOUT", "[runner]") {
  RunReport report;
  report.records.push_back({0, "a", Verdict::Pass, 0, 0.01, 0, 0, "", ""});
  report.records.push_back({0, "b", Verdict::Error, {}, 0.0, 0, 0, "spawn failed", ""});
  report.records.push_back({1, "a", Verdict::Timeout, {}, 5.0, 0, 0,
                            "timed out after 5.000s", "/tmp/x"});
  report.totals = {1, 0, 1, 1};
  const std::string tap = citkit::report_to_tap(report);
  CHECK(tap.find("1..3") != std::string::npos);
  CHECK(count_occurrences(tap, "not ok") == 2);
  CHECK(tap.find("# t0-b: spawn failed") != std::string::npos);
  CHECK(tap.find("# t1-a: timed out") != std::string::npos);
}

TEST_CASE("JSON report round-trips to structural equality", "[runner]") {
  testutil::TempDir dir("json");
  const auto model = testutil::qemu_model();
  const auto script = testutil::write_script(
      dir.path(), "one.sh",
      "if [ \"$CIT_TEST_INDEX\" = \"0\" ]; then echo out; exit 1; fi\nexit 0");
  const auto plan = multiplex(small_suite(model, 3), {{"one", script, {}}});
  const auto report = citkit::run(plan, model, {.work_dir = dir.path() / "work"});

  const auto j = citkit::report_to_json(report);
  const RunReport back = citkit::report_from_json(j);
  CHECK(back == report);
  // serialize again: identical JSON
  CHECK(citkit::report_to_json(back) == j);
}

TEST_CASE("xUnit counts match verdict totals", "[runner]") {
  RunReport report;
  report.records.push_back({0, "a", Verdict::Pass, 0, 0.01, 0, 0, "", ""});
  report.records.push_back({0, "b", Verdict::Fail, 2, 0.01, 0, 0, "", "/tmp/b"});
  report.records.push_back({1, "a", Verdict::Error, {}, 0.0, 0, 0, "boom", ""});
  report.records.push_back({1, "b", Verdict::Timeout, {}, 9.0, 0, 0, "timed out", ""});
  report.totals = {1, 1, 1, 1};
  report.total_wall_seconds = 9.02;

  const std::string xml = citkit::report_to_xunit(report);
  CHECK(xml.find("tests=\"4\"") != std::string::npos);
  CHECK(xml.find("failures=\"1\"") != std::string::npos);
  CHECK(xml.find("errors=\"2\"") != std::string::npos);
  CHECK(xml.find("<testcase name=\"t0-a\"") != std::string::npos);
  CHECK(xml.find("<failure message=\"exit code 2\"/>") != std::string::npos);
  CHECK(count_occurrences(xml, "<error") == 2);
}

TEST_CASE("run validates its inputs", "[runner]") {
  const auto model = testutil::qemu_model();
  citkit::VariantPlan empty;
  CHECK_THROWS_AS(citkit::run(empty, model, {}), citkit::Error);
  const auto plan = multiplex(small_suite(model, 1), {{"x", "/bin/true", {}}});
  CHECK_THROWS_AS(citkit::run(plan, model, {.parallelism = 0}), citkit::Error);
}
