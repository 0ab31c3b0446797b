#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "citkit/analyze.hpp"
#include "citkit/coverage.hpp"
#include "citkit/generator.hpp"
#include "citkit/model.hpp"
#include "citkit/plan.hpp"
#include "citkit/runner.hpp"
#include "citkit/synth.hpp"

namespace citkit {

inline constexpr const char* kVersion = "0.1.0";

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read " + path.string());
  std::ostringstream body;
  body << in.rdbuf();
  return body.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view body) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << body;
}

inline bool looks_like_json(std::string_view body) {
  const auto t = trim(body);
  return !t.empty() && (t.front() == '{' || t.front() == '[');
}

}  // namespace detail

inline Model load_model_file(const std::filesystem::path& path) {
  return parse_model(detail::read_file(path));
}

// Accepts either the CSV or the JSON suite form, by content.
inline TestSuite load_suite_file(const std::filesystem::path& path,
                                 const Model& model) {
  const auto body = detail::read_file(path);
  if (detail::looks_like_json(body))
    return suite_from_json(nlohmann::json::parse(body), model);
  return suite_from_csv(body, model);
}

// Script set: a manifest file (JSON list) or a directory of executables.
inline std::vector<VariantScript> load_scripts(const std::filesystem::path& path) {
  if (std::filesystem::is_directory(path)) return scan_script_dir(path);
  const auto body = detail::read_file(path);
  return load_script_manifest(nlohmann::json::parse(body),
                              std::filesystem::absolute(path).parent_path());
}

// --- generate ----------------------------------------------------------------

struct GenerateOptions {
  std::filesystem::path model_path;
  int strength = 2;
  std::string algorithm = "greedy";  // greedy | pso
  std::uint64_t seed = 0;
  PsoConfig pso;  // seed field is overridden by `seed`
  int candidate_attempts = 50;
  std::filesystem::path output_dir = ".";
  std::string basename;  // default suite-t<strength>
};

// Writes <basename>.csv and <basename>.json; returns 0.
inline int cmd_generate(const GenerateOptions& options, std::ostream& out) {
  const Model model = load_model_file(options.model_path);
  TestSuite suite;
  if (options.algorithm == "greedy") {
    suite = generate_greedy(model, options.strength, options.seed,
                            options.candidate_attempts);
  } else if (options.algorithm == "pso") {
    PsoConfig config = options.pso;
    config.seed = options.seed;
    suite = generate_pso(model, options.strength, config);
  } else {
    throw Error("unknown generator '" + options.algorithm + "' (greedy|pso)");
  }

  const std::string base = options.basename.empty()
                               ? "suite-t" + std::to_string(options.strength)
                               : options.basename;
  const auto csv_path = options.output_dir / (base + ".csv");
  const auto json_path = options.output_dir / (base + ".json");
  detail::write_file(csv_path, suite_to_csv(suite, model));
  detail::write_file(json_path, suite_to_json(suite, model).dump(2) + "\n");
  out << suite.rows.size() << " tests (strength " << options.strength << ") -> "
      << csv_path.string() << ", " << json_path.string() << "\n";
  return 0;
}

// --- measure -----------------------------------------------------------------

struct MeasureOptions {
  std::filesystem::path model_path;
  std::filesystem::path suite_path;
  std::vector<int> strengths;  // empty = 1..k
  std::filesystem::path json_out;  // optional
};

inline int cmd_measure(const MeasureOptions& options, std::ostream& out) {
  const Model model = load_model_file(options.model_path);
  const TestSuite suite = load_suite_file(options.suite_path, model);
  std::vector<int> strengths = options.strengths;
  if (strengths.empty())
    for (int s = 1; s <= static_cast<int>(model.factor_count()); ++s)
      strengths.push_back(s);
  const CoverageReport report = measure(suite, model, strengths);
  out << coverage_to_table(report);
  if (!options.json_out.empty())
    detail::write_file(options.json_out, coverage_to_json(report).dump(2) + "\n");
  return 0;
}

// --- run ---------------------------------------------------------------------

struct RunCmdOptions {
  std::filesystem::path model_path;
  std::filesystem::path suite_path;
  std::filesystem::path scripts;  // manifest file or directory
  int parallelism = 0;            // 0: CITKIT_PARALLELISM env, else 1
  double timeout_seconds = 60.0;
  std::filesystem::path output_dir = "citkit-out";
  std::vector<std::string> formats = {"tap", "json", "xunit"};
};

inline int resolve_parallelism(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("CITKIT_PARALLELISM")) {
    const int value = std::atoi(env);
    if (value > 0) return value;
  }
  return 1;
}

// Executes suite x scripts; writes report.{tap,json,xml} under output_dir.
// Exit status: 0 all PASS, 1 any FAIL, 2 any ERROR/TIMEOUT.
inline int cmd_run(const RunCmdOptions& options, std::ostream& out) {
  const Model model = load_model_file(options.model_path);
  const TestSuite suite = load_suite_file(options.suite_path, model);
  const auto scripts = load_scripts(options.scripts);
  const VariantPlan plan = multiplex(suite, scripts);

  RunOptions run_options;
  run_options.parallelism = resolve_parallelism(options.parallelism);
  run_options.default_timeout_seconds = options.timeout_seconds;
  run_options.work_dir = options.output_dir / "work";
  const RunReport report = run(plan, model, run_options);

  for (const auto& format : options.formats) {
    if (format == "tap")
      detail::write_file(options.output_dir / "report.tap", report_to_tap(report));
    else if (format == "json")
      detail::write_file(options.output_dir / "report.json",
                         report_to_json(report).dump(2) + "\n");
    else if (format == "xunit")
      detail::write_file(options.output_dir / "report.xml", report_to_xunit(report));
    else
      throw Error("unknown report format '" + format + "' (tap|json|xunit)");
  }

  out << plan.size() << " variants: " << report.totals.passed << " PASS, "
      << report.totals.failed << " FAIL, " << report.totals.errored << " ERROR, "
      << report.totals.timed_out << " TIMEOUT ("
      << detail::format_seconds(report.total_wall_seconds) << "s, parallelism "
      << report.parallelism << ")\n";
  return exit_code_for(report);
}

// --- analyze -----------------------------------------------------------------

struct AnalyzeRunInput {
  int strength = 0;
  std::filesystem::path suite_path;
  std::filesystem::path report_path;
};

struct AnalyzeOptions {
  std::filesystem::path model_path;
  std::vector<AnalyzeRunInput> runs;
  std::filesystem::path output_dir = ".";
};

inline int cmd_analyze(const AnalyzeOptions& options, std::ostream& out) {
  if (options.runs.empty()) throw Error("analyze needs at least one run");
  const Model model = load_model_file(options.model_path);
  std::map<int, StrengthRun> runs;
  for (const auto& input : options.runs) {
    StrengthRun run;
    run.suite = load_suite_file(input.suite_path, model);
    run.suite.strength = input.strength;
    run.report = report_from_json(
        nlohmann::json::parse(detail::read_file(input.report_path)));
    if (!runs.emplace(input.strength, std::move(run)).second)
      throw Error("duplicate strength " + std::to_string(input.strength) +
                  " in analyze inputs");
  }
  const AttributionReport report = attribution_chain(runs, model);
  const std::string table = attribution_to_table(report);
  out << table;
  detail::write_file(options.output_dir / "attribution.json",
                     attribution_to_json(report, model).dump(2) + "\n");
  detail::write_file(options.output_dir / "attribution.txt", table);
  return 0;
}

// --- synth -------------------------------------------------------------------

struct SynthOptions {
  std::filesystem::path model_path;
  int count = 192;
  std::filesystem::path faults_path;  // optional
  std::filesystem::path output_dir;
};

inline int cmd_synth(const SynthOptions& options, std::ostream& out) {
  const Model model = load_model_file(options.model_path);
  std::vector<PlantedFault> faults;
  if (!options.faults_path.empty())
    faults = faults_from_json(
        nlohmann::json::parse(detail::read_file(options.faults_path)), model);
  const auto ids = write_stub_scripts(model, faults, options.count,
                                      options.output_dir);
  out << ids.size() << " stub scripts (" << faults.size() << " planted faults) -> "
      << options.output_dir.string() << "\n";
  return 0;
}

}  // namespace citkit
