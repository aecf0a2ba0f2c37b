#pragma once

// Run configuration and report records: what the CLI runs and what it
// writes (report.jsonl, one record per line, and the report.txt table).

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rngaudit/harness.hpp"
#include "rngaudit/level1.hpp"

namespace rngaudit {

using Json = nlohmann::ordered_json;

// Bad command line or config file; the CLI exits with status 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The output directory or files cannot be written; exit status 3.
class OutputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Tier { kDesk, kPaper };
std::string_view to_string(Tier tier);

struct RunConfig {
  std::string suite = "single";  // nist | smallcrush-subset | crush-subset | single
  std::vector<TestId> tests;     // for suite "single"
  // Empty: both variants for tests that have them, original otherwise.
  std::optional<Variant> variant;
  std::vector<std::string> generators = {"mt19937"};
  std::string seed_hex = "5eed";
  Tier tier = Tier::kDesk;
  std::optional<std::int64_t> n;  // overrides the tier's per-test n
  std::optional<std::int64_t> N;
  std::optional<std::int64_t> Nprime;
  double alpha = 0.01;
  double min_expect = 5.0;
  std::optional<std::int64_t> j_min;
  std::optional<int> savir_t;
  std::optional<std::int64_t> savir_m;
  std::optional<int> lag;
  std::optional<int> threads;
  std::string out = "rng_audit_out";
  bool force = false;
  double budget_seconds = 3600.0;  // paper tier guard, see plan_runs
  bool verbose = false;

  std::int64_t resolved_N() const;
  std::int64_t resolved_Nprime() const;
  int resolved_threads() const;  // flag, then RNG_AUDIT_THREADS, then cores
};

// Applies the keys of a JSON config object; unknown keys are rejected.
void apply_config_json(const Json& j, RunConfig& config);
Json config_to_json(const RunConfig& config);

// Command line (argv[0] included). Throws UsageError with the message, or
// with the usage text when there are no arguments.
RunConfig parse_cli(int argc, const char* const* argv);
std::string usage_text();

// Tests of a suite in the order of the audited suite's table.
std::vector<TestId> suite_tests(const std::string& suite);

// Per-test first-level n for a tier.
std::int64_t tier_n(Tier tier, TestId id);

struct PlannedRun {
  TestDescriptor test;  // resolved
  std::string generator;
  double estimated_seconds = 0.0;
};
// Expands suite x generator x variant. Throws UsageError on invalid
// combinations, or when the paper tier exceeds the budget without force.
std::vector<PlannedRun> plan_runs(const RunConfig& config);

struct ReportRecord {
  std::string version;
  std::string suite;
  std::string tier;
  TestId test = TestId::kFrequency;
  Variant variant = Variant::kOriginal;
  int index = 0;
  std::string label;
  std::string generator;
  std::string seed;
  std::int64_t n = 0;
  std::int64_t N = 0;
  std::int64_t Nprime = 0;
  double alpha = 0.0;
  TestParams params;
  std::vector<std::int64_t> T;
  std::vector<std::string> categories;
  std::vector<double> category_probs;
  std::vector<std::int64_t> Y;
  double h = 0.0;
  int df = 0;
  double pvalue3 = 1.0;  // 0 stands for "eps"
  double log10_pvalue3 = 0.0;
  std::int64_t discard_count = 0;

  bool operator==(const ReportRecord&) const = default;
};

ReportRecord make_record(const HarnessReport& report, const RunConfig& config);
Json record_to_json(const ReportRecord& record);
ReportRecord record_from_json(const Json& j);

// One JSON object per line.
std::string records_to_jsonl(const std::vector<ReportRecord>& records);
std::vector<ReportRecord> records_from_jsonl(const std::string& text);

// Table: rows are tests (or x values for the excursion tests), columns are
// variant x generator. The 148 template p-values become "passed/148".
std::string records_to_table(const std::vector<ReportRecord>& records);

// Writes <dir>/report.jsonl and <dir>/report.txt. Throws OutputError.
void emit_report(const std::vector<ReportRecord>& records,
                 const std::string& dir);

}  // namespace rngaudit
