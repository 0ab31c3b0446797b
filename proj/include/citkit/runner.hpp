#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "citkit/detail/text.hpp"
#include "citkit/model.hpp"
#include "citkit/plan.hpp"

extern char** environ;

namespace citkit {

// PASS and FAIL follow the exit-code contract: a normal exit with code 0 is
// PASS, a normal exit with any other code is FAIL. TIMEOUT and ERROR are
// execution accidents and never carry PASS/FAIL semantics.
enum class Verdict { Pass, Fail, Error, Timeout };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Error: return "ERROR";
    case Verdict::Timeout: return "TIMEOUT";
  }
  return "ERROR";
}

inline std::optional<Verdict> verdict_from_string(std::string_view s) {
  if (s == "PASS") return Verdict::Pass;
  if (s == "FAIL") return Verdict::Fail;
  if (s == "ERROR") return Verdict::Error;
  if (s == "TIMEOUT") return Verdict::Timeout;
  return std::nullopt;
}

struct RunRecord {
  std::size_t test_index = 0;
  std::string variant_id;
  Verdict verdict = Verdict::Error;
  std::optional<int> exit_code;
  double duration_seconds = 0.0;
  std::uint64_t stdout_bytes = 0;
  std::uint64_t stderr_bytes = 0;
  std::string detail;       // diagnostic for ERROR/TIMEOUT, empty otherwise
  std::string scratch_dir;  // retained on FAIL/ERROR/TIMEOUT, empty on PASS

  std::string name() const {
    return "t" + std::to_string(test_index) + "-" + variant_id;
  }

  bool operator==(const RunRecord&) const = default;
};

struct VerdictTotals {
  std::size_t passed = 0;
  std::size_t failed = 0;
  std::size_t errored = 0;
  std::size_t timed_out = 0;

  std::size_t sum() const { return passed + failed + errored + timed_out; }
  bool operator==(const VerdictTotals&) const = default;
};

struct RunReport {
  std::vector<RunRecord> records;  // plan order
  VerdictTotals totals;
  double total_wall_seconds = 0.0;
  int parallelism = 1;

  bool all_passed() const { return totals.passed == records.size(); }
  bool operator==(const RunReport&) const = default;
};

struct RunOptions {
  int parallelism = 1;
  double default_timeout_seconds = 60.0;
  // Scratch directories live under here; a unique temp dir when empty.
  std::filesystem::path work_dir;
};

// CLI exit-code contract: 0 all PASS, 1 any FAIL, 2 any ERROR/TIMEOUT
// (dominates FAIL), 3 is reserved for usage errors.
inline int exit_code_for(const RunReport& report) {
  if (report.totals.errored > 0 || report.totals.timed_out > 0) return 2;
  if (report.totals.failed > 0) return 1;
  return 0;
}

namespace detail {

inline std::filesystem::path make_unique_dir(const std::filesystem::path& base,
                                             const std::string& prefix) {
  static std::atomic<unsigned> counter{0};
  for (;;) {
    const auto candidate =
        base / (prefix + std::to_string(::getpid()) + "-" +
                std::to_string(counter.fetch_add(1)));
    std::error_code ec;
    if (std::filesystem::create_directories(candidate, ec)) return candidate;
    if (ec) throw Error("cannot create directory " + candidate.string());
  }
}

inline std::string scratch_name(const PlanEntry& entry) {
  std::string name = "t" + std::to_string(entry.test_index) + "-" + entry.script.id;
  for (char& c : name)
    if (c == '/') c = '_';
  return name;
}

inline std::vector<std::string> merged_environment(
    const std::map<std::string, std::string>& overlay) {
  std::map<std::string, std::string> env;
  for (char** e = environ; e && *e; ++e) {
    const std::string_view kv(*e);
    const auto eq = kv.find('=');
    if (eq == std::string_view::npos) continue;
    env[std::string(kv.substr(0, eq))] = std::string(kv.substr(eq + 1));
  }
  for (const auto& [k, v] : overlay) env[k] = v;
  std::vector<std::string> out;
  out.reserve(env.size());
  for (const auto& [k, v] : env) out.push_back(k + "=" + v);
  return out;
}

inline std::uint64_t file_size_or_zero(const std::filesystem::path& p) {
  std::error_code ec;
  const auto n = std::filesystem::file_size(p, ec);
  return ec ? 0 : static_cast<std::uint64_t>(n);
}

inline RunRecord execute_entry(const Model& model, const PlanEntry& entry,
                               const std::filesystem::path& work_dir,
                               double default_timeout) {
  RunRecord rec;
  rec.test_index = entry.test_index;
  rec.variant_id = entry.script.id;

  const auto scratch = work_dir / scratch_name(entry);
  std::filesystem::create_directories(scratch);
  rec.scratch_dir = scratch.string();

  const auto script = std::filesystem::absolute(entry.script.path);
  std::error_code ec;
  if (!std::filesystem::is_regular_file(script, ec)) {
    rec.verdict = Verdict::Error;
    rec.detail = "script not found: " + script.string();
    return rec;
  }
  if (::access(script.c_str(), X_OK) != 0) {
    rec.verdict = Verdict::Error;
    rec.detail = "script not executable: " + script.string();
    return rec;
  }

  const auto stdout_path = scratch / "stdout.log";
  const auto stderr_path = scratch / "stderr.log";

  const auto env_strings = merged_environment(environment_for(model, entry));
  std::vector<char*> envp;
  envp.reserve(env_strings.size() + 1);
  for (const auto& s : env_strings) envp.push_back(const_cast<char*>(s.c_str()));
  envp.push_back(nullptr);

  const std::string script_str = script.string();
  char* argv[] = {const_cast<char*>(script_str.c_str()), nullptr};

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, 1, stdout_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addopen(&actions, 2, stderr_path.c_str(),
                                   O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_addchdir_np(&actions, scratch.c_str());

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  // Own process group so a timeout kill reaches the script's children too.
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  const auto start = std::chrono::steady_clock::now();
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, script_str.c_str(), &actions, &attr, argv,
                               envp.data());
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);

  if (rc != 0) {
    rec.verdict = Verdict::Error;
    rec.detail = std::string("spawn failed: ") + std::strerror(rc);
    return rec;
  }

  const double timeout =
      entry.script.timeout_seconds.value_or(default_timeout);
  const auto deadline =
      start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                  std::chrono::duration<double>(timeout));

  int status = 0;
  bool timed_out = false;
  for (;;) {
    const pid_t waited = ::waitpid(pid, &status, WNOHANG);
    if (waited == pid) break;
    if (std::chrono::steady_clock::now() >= deadline) {
      ::killpg(pid, SIGKILL);
      ::waitpid(pid, &status, 0);
      timed_out = true;
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  const auto end = std::chrono::steady_clock::now();
  rec.duration_seconds = std::chrono::duration<double>(end - start).count();
  rec.stdout_bytes = file_size_or_zero(stdout_path);
  rec.stderr_bytes = file_size_or_zero(stderr_path);

  if (timed_out) {
    rec.verdict = Verdict::Timeout;
    rec.detail = "timed out after " + format_seconds(timeout) + "s";
  } else if (WIFEXITED(status)) {
    rec.exit_code = WEXITSTATUS(status);
    rec.verdict = *rec.exit_code == 0 ? Verdict::Pass : Verdict::Fail;
  } else if (WIFSIGNALED(status)) {
    rec.verdict = Verdict::Error;
    rec.detail = "terminated by signal " + std::to_string(WTERMSIG(status));
  } else {
    rec.verdict = Verdict::Error;
    rec.detail = "unexpected wait status " + std::to_string(status);
  }

  if (rec.verdict == Verdict::Pass) {
    std::error_code cleanup_ec;
    std::filesystem::remove_all(scratch, cleanup_ec);
    rec.scratch_dir.clear();
  }
  return rec;
}

}  // namespace detail

// Executes every plan entry as a subprocess, up to `parallelism` at a time.
// Records come back in plan order regardless of completion order. Failing
// entries keep their scratch directory (stdout/stderr logs); passing entries
// have theirs removed.
inline RunReport run(const VariantPlan& plan, const Model& model,
                     const RunOptions& options = {}) {
  if (options.parallelism < 1) throw Error("parallelism must be >= 1");
  if (plan.entries.empty()) throw Error("cannot run an empty plan");

  const auto work_dir =
      options.work_dir.empty()
          ? detail::make_unique_dir(std::filesystem::temp_directory_path(),
                                    "citkit-run-")
          : options.work_dir;
  std::filesystem::create_directories(work_dir);

  const auto start = std::chrono::steady_clock::now();
  RunReport report;
  report.parallelism = options.parallelism;
  report.records.resize(plan.entries.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= plan.entries.size()) break;
      try {
        report.records[i] = detail::execute_entry(
            model, plan.entries[i], work_dir, options.default_timeout_seconds);
      } catch (const std::exception& e) {
        RunRecord rec;
        rec.test_index = plan.entries[i].test_index;
        rec.variant_id = plan.entries[i].script.id;
        rec.verdict = Verdict::Error;
        rec.detail = e.what();
        report.records[i] = std::move(rec);
      }
    }
  };

  const auto thread_count = std::min<std::size_t>(
      static_cast<std::size_t>(options.parallelism), plan.entries.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(thread_count);
    for (std::size_t i = 0; i < thread_count; ++i) pool.emplace_back(worker);
  }

  for (const auto& rec : report.records) {
    switch (rec.verdict) {
      case Verdict::Pass: ++report.totals.passed; break;
      case Verdict::Fail: ++report.totals.failed; break;
      case Verdict::Error: ++report.totals.errored; break;
      case Verdict::Timeout: ++report.totals.timed_out; break;
    }
  }
  report.total_wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

// --- report serialization ---------------------------------------------------

// TAP version 13: one line per record in plan order, verdict in the
// description, diagnostics for ERROR/TIMEOUT.
inline std::string report_to_tap(const RunReport& report) {
  std::string out = "TAP version 13\n";
  out += "1.." + std::to_string(report.records.size()) + "\n";
  std::size_t n = 0;
  for (const auto& rec : report.records) {
    ++n;
    const bool ok = rec.verdict == Verdict::Pass;
    out += ok ? "ok " : "not ok ";
    out += std::to_string(n) + " - " + rec.name() + " " + to_string(rec.verdict);
    if (rec.verdict == Verdict::Fail && rec.exit_code)
      out += " exit=" + std::to_string(*rec.exit_code);
    out += " (" + detail::format_seconds(rec.duration_seconds) + "s)\n";
    if (rec.verdict == Verdict::Error || rec.verdict == Verdict::Timeout)
      out += "# " + rec.name() + ": " + rec.detail + "\n";
  }
  return out;
}

inline nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : report.records) {
    nlohmann::json jr{{"test_index", rec.test_index},
                      {"variant_id", rec.variant_id},
                      {"verdict", to_string(rec.verdict)},
                      {"duration_seconds", rec.duration_seconds},
                      {"stdout_bytes", rec.stdout_bytes},
                      {"stderr_bytes", rec.stderr_bytes},
                      {"detail", rec.detail},
                      {"scratch_dir", rec.scratch_dir}};
    if (rec.exit_code)
      jr["exit_code"] = *rec.exit_code;
    else
      jr["exit_code"] = nullptr;
    records.push_back(std::move(jr));
  }
  return nlohmann::json{
      {"schema", "citkit-run-report-v1"},
      {"parallelism", report.parallelism},
      {"total_wall_seconds", report.total_wall_seconds},
      {"totals",
       {{"pass", report.totals.passed},
        {"fail", report.totals.failed},
        {"error", report.totals.errored},
        {"timeout", report.totals.timed_out}}},
      {"records", std::move(records)}};
}

inline RunReport report_from_json(const nlohmann::json& j) {
  RunReport report;
  report.parallelism = j.at("parallelism").get<int>();
  report.total_wall_seconds = j.at("total_wall_seconds").get<double>();
  for (const auto& jr : j.at("records")) {
    RunRecord rec;
    rec.test_index = jr.at("test_index").get<std::size_t>();
    rec.variant_id = jr.at("variant_id").get<std::string>();
    const auto verdict = verdict_from_string(jr.at("verdict").get<std::string>());
    if (!verdict)
      throw Error("unknown verdict '" + jr.at("verdict").get<std::string>() + "'");
    rec.verdict = *verdict;
    if (!jr.at("exit_code").is_null()) rec.exit_code = jr["exit_code"].get<int>();
    rec.duration_seconds = jr.at("duration_seconds").get<double>();
    rec.stdout_bytes = jr.at("stdout_bytes").get<std::uint64_t>();
    rec.stderr_bytes = jr.at("stderr_bytes").get<std::uint64_t>();
    rec.detail = jr.value("detail", "");
    rec.scratch_dir = jr.value("scratch_dir", "");
    report.records.push_back(std::move(rec));
    switch (report.records.back().verdict) {
      case Verdict::Pass: ++report.totals.passed; break;
      case Verdict::Fail: ++report.totals.failed; break;
      case Verdict::Error: ++report.totals.errored; break;
      case Verdict::Timeout: ++report.totals.timed_out; break;
    }
  }
  const auto& totals = j.at("totals");
  if (totals.at("pass").get<std::size_t>() != report.totals.passed ||
      totals.at("fail").get<std::size_t>() != report.totals.failed ||
      totals.at("error").get<std::size_t>() != report.totals.errored ||
      totals.at("timeout").get<std::size_t>() != report.totals.timed_out)
    throw Error("run report totals do not match records");
  return report;
}

// xUnit XML: one testcase per record; FAIL maps to <failure>, ERROR and
// TIMEOUT map to <error>.
inline std::string report_to_xunit(const RunReport& report) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<testsuite name=\"citkit\" tests=" +
         std::string("\"") + std::to_string(report.records.size()) + "\"" +
         " failures=\"" + std::to_string(report.totals.failed) + "\"" +
         " errors=\"" +
         std::to_string(report.totals.errored + report.totals.timed_out) + "\"" +
         " time=\"" + detail::format_seconds(report.total_wall_seconds) + "\">\n";
  for (const auto& rec : report.records) {
    out += "  <testcase name=\"" + detail::xml_escape(rec.name()) + "\" time=\"" +
           detail::format_seconds(rec.duration_seconds) + "\"";
    if (rec.verdict == Verdict::Pass) {
      out += "/>\n";
      continue;
    }
    out += ">\n";
    if (rec.verdict == Verdict::Fail) {
      out += "    <failure message=\"exit code " +
             (rec.exit_code ? std::to_string(*rec.exit_code) : std::string("?")) +
             "\"/>\n";
    } else {
      out += "    <error message=\"" + detail::xml_escape(rec.detail) + "\"/>\n";
    }
    out += "  </testcase>\n";
  }
  out += "</testsuite>\n";
  return out;
}

}  // namespace citkit
