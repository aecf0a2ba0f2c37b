// rng_audit: runs three-level tests and writes report.jsonl / report.txt.
//
// Exit status: 0 completed, 1 runtime failure (input exhausted, test
// inapplicable), 2 usage error, 3 output not writable.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "rngaudit/errors.hpp"
#include "rngaudit/harness.hpp"
#include "rngaudit/numerics.hpp"
#include "rngaudit/report.hpp"

namespace {

using namespace rngaudit;

// Fails early, before hours of computation, if the output is unwritable.
void check_output_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw OutputError("cannot create output directory " + dir);
  }
  const fs::path probe = fs::path(dir) / ".rng_audit_probe";
  {
    std::ofstream out(probe);
    if (!out) throw OutputError("output directory is not writable: " + dir);
  }
  fs::remove(probe, ec);
}

int run(int argc, char** argv) {
  const RunConfig config = parse_cli(argc, argv);
  const std::vector<PlannedRun> plan = plan_runs(config);
  check_output_dir(config.out);
  std::cerr << "config " << config_to_json(config).dump() << "\n";

  const Bytes seed = parse_hex(config.seed_hex);
  std::vector<ReportRecord> records;
  for (const PlannedRun& run : plan) {
    HarnessConfig hc;
    hc.generator = GeneratorSpec::parse(run.generator, seed);
    hc.N = config.resolved_N();
    hc.Nprime = config.resolved_Nprime();
    hc.alpha = config.alpha;
    hc.min_expect = config.min_expect;
    hc.threads = config.resolved_threads();
    const std::string tag = std::string(to_string(run.test.id)) + " " +
                            std::string(to_string(run.test.variant)) + " " +
                            run.generator;
    if (config.verbose) {
      hc.log = [&tag](const std::string& line) {
        std::cerr << tag << ": " << line << "\n";
      };
    }
    const std::vector<HarnessReport> reports = run_three_level(run.test, hc);
    for (const HarnessReport& r : reports) records.push_back(make_record(r, config));
    std::cerr << tag << " n=" << run.test.n << " done in "
              << reports.front().seconds << " s";
    if (reports.size() == 1) {
      std::cerr << ", pvalue3 " << format_pvalue(reports.front().pvalue3);
    }
    if (reports.front().discard_count > 0) {
      std::cerr << ", discards " << reports.front().discard_count;
    }
    std::cerr << "\n";
  }
  emit_report(records, config.out);
  std::cout << records_to_table(records);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << usage_text();
    return 0;
  } catch (const UsageError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const OutputError& e) {
    std::cerr << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
