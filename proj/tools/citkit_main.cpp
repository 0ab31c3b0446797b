// citkit command line: generate / measure / run / analyze / synth.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "citkit/citkit.hpp"

namespace {

std::vector<citkit::AnalyzeRunInput> parse_run_inputs(
    const std::vector<std::string>& specs) {
  std::vector<citkit::AnalyzeRunInput> inputs;
  for (const auto& spec : specs) {
    const auto first = spec.find(':');
    const auto second = first == std::string::npos ? std::string::npos
                                                   : spec.find(':', first + 1);
    if (first == std::string::npos || second == std::string::npos)
      throw citkit::Error("expected STRENGTH:SUITE:REPORT, got '" + spec + "'");
    citkit::AnalyzeRunInput input;
    input.strength = std::stoi(spec.substr(0, first));
    input.suite_path = spec.substr(first + 1, second - first - 1);
    input.report_path = spec.substr(second + 1);
    inputs.push_back(std::move(input));
  }
  return inputs;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citkit - t-way covering array generation, execution and analysis"};
  app.set_version_flag("--version", citkit::kVersion);
  app.require_subcommand(1);

  citkit::GenerateOptions generate;
  auto* cmd_generate = app.add_subcommand("generate", "generate a t-way test suite");
  cmd_generate->add_option("--model,-m", generate.model_path, "model file")->required();
  cmd_generate->add_option("--strength,-t", generate.strength, "interaction strength")
      ->required();
  cmd_generate->add_option("--generator,-g", generate.algorithm, "greedy|pso")
      ->check(CLI::IsMember({"greedy", "pso"}));
  cmd_generate->add_option("--seed,-s", generate.seed, "random seed");
  cmd_generate->add_option("--output,-o", generate.output_dir, "output directory");
  cmd_generate->add_option("--name", generate.basename, "output basename");
  cmd_generate->add_option("--candidates", generate.candidate_attempts,
                           "greedy candidates per test");
  cmd_generate->add_option("--swarm-size", generate.pso.swarm_size, "PSO swarm size");
  cmd_generate->add_option("--iterations", generate.pso.iterations,
                           "PSO iterations per test");
  cmd_generate->add_option("--inertia-start", generate.pso.inertia_start,
                           "PSO initial inertia weight");
  cmd_generate->add_option("--inertia-end", generate.pso.inertia_end,
                           "PSO final inertia weight");
  cmd_generate->add_option("--cognitive", generate.pso.cognitive,
                           "PSO cognitive coefficient");
  cmd_generate->add_option("--social", generate.pso.social, "PSO social coefficient");

  citkit::MeasureOptions measure;
  auto* cmd_measure = app.add_subcommand("measure", "measure combinatorial coverage");
  cmd_measure->add_option("--model,-m", measure.model_path, "model file")->required();
  cmd_measure->add_option("--suite", measure.suite_path, "suite file (CSV or JSON)")
      ->required();
  cmd_measure->add_option("--strengths,-s", measure.strengths,
                          "strengths to measure (default: all)")
      ->delimiter(',');
  cmd_measure->add_option("--json", measure.json_out, "write JSON report here");

  citkit::RunCmdOptions run;
  auto* cmd_run = app.add_subcommand("run", "execute suite x scripts");
  cmd_run->add_option("--model,-m", run.model_path, "model file")->required();
  cmd_run->add_option("--suite", run.suite_path, "suite file")->required();
  cmd_run->add_option("--scripts", run.scripts, "script directory or manifest JSON")
      ->required();
  cmd_run->add_option("--parallelism,-j", run.parallelism,
                      "concurrent scripts (default: $CITKIT_PARALLELISM or 1)");
  cmd_run->add_option("--timeout", run.timeout_seconds,
                      "default per-variant timeout in seconds");
  cmd_run->add_option("--output,-o", run.output_dir, "report/work directory");
  cmd_run->add_option("--formats", run.formats, "report formats (tap,json,xunit)")
      ->delimiter(',');

  citkit::AnalyzeOptions analyze;
  std::vector<std::string> analyze_runs;
  auto* cmd_analyze =
      app.add_subcommand("analyze", "attribute failures to lower-strength tuples");
  cmd_analyze->add_option("--model,-m", analyze.model_path, "model file")->required();
  cmd_analyze
      ->add_option("--run,-r", analyze_runs,
                   "per-strength input as STRENGTH:SUITE:REPORT (repeatable)")
      ->required();
  cmd_analyze->add_option("--output,-o", analyze.output_dir, "output directory");

  citkit::SynthOptions synth;
  auto* cmd_synth =
      app.add_subcommand("synth", "write synthetic SUT stub scripts");
  cmd_synth->add_option("--model,-m", synth.model_path, "model file")->required();
  cmd_synth->add_option("--count,-n", synth.count, "number of stub scripts");
  cmd_synth->add_option("--faults", synth.faults_path, "planted fault spec JSON");
  cmd_synth->add_option("--output,-o", synth.output_dir, "script directory")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 3;
  }

  try {
    if (cmd_generate->parsed()) return citkit::cmd_generate(generate, std::cout);
    if (cmd_measure->parsed()) return citkit::cmd_measure(measure, std::cout);
    if (cmd_run->parsed()) return citkit::cmd_run(run, std::cout);
    if (cmd_analyze->parsed()) {
      analyze.runs = parse_run_inputs(analyze_runs);
      return citkit::cmd_analyze(analyze, std::cout);
    }
    if (cmd_synth->parsed()) return citkit::cmd_synth(synth, std::cout);
  } catch (const citkit::Error& e) {
    std::cerr << "citkit: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "citkit: " << e.what() << "\n";
    return 3;
  }
  return 3;
}
