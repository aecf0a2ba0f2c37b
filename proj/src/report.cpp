#include "rngaudit/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

#include "rngaudit/errors.hpp"
#include "rngaudit/nist.hpp"
#include "rngaudit/numerics.hpp"

#ifndef RNGAUDIT_VERSION
#define RNGAUDIT_VERSION "0.0.0"
#endif

namespace rngaudit {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Tier parse_tier(const std::string& text) {
  if (text == "desk") return Tier::kDesk;
  if (text == "paper") return Tier::kPaper;
  throw UsageError("unknown tier: " + text);
}

const std::vector<std::string>& known_suites() {
  static const std::vector<std::string> suites = {"nist", "smallcrush-subset",
                                                  "crush-subset", "single"};
  return suites;
}

std::vector<TestId> parse_test_list(const std::vector<std::string>& names) {
  std::vector<TestId> out;
  for (const std::string& name : names) {
    try {
      out.push_back(parse_test_id(name));
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

template <typename T>
std::optional<T> optional_from(const Json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

template <typename T>
Json optional_to(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

// Rough single-thread cost of one level-1 application, in seconds.
double application_seconds(const TestDescriptor& d) {
  constexpr double kSetup = 5e-6;
  const double n = static_cast<double>(d.n);
  switch (d.id) {
    case TestId::kDft:
      return kSetup + n * 60e-9;
    case TestId::kLinearComplexity:
      return kSetup + n * 40e-9;
    case TestId::kSampleCorr:
      return kSetup + n * 8e-9;
    case TestId::kStringRun:
      return kSetup + n * 25e-9;
    case TestId::kSavir2:
      return kSetup + n * 8e-9 * d.params.savir_t.value_or(9);
    case TestId::kIdentity:
      return kSetup;
    default:
      return kSetup + n * 15e-9;
  }
}

}  // namespace

std::string_view to_string(Tier tier) {
  return tier == Tier::kDesk ? "desk" : "paper";
}

std::int64_t RunConfig::resolved_N() const {
  return N.value_or(tier == Tier::kPaper ? 1000 : 100);
}

std::int64_t RunConfig::resolved_Nprime() const {
  return Nprime.value_or(tier == Tier::kPaper ? 1000 : 100);
}

int RunConfig::resolved_threads() const {
  if (threads) return *threads;
  if (const char* env = std::getenv("RNG_AUDIT_THREADS")) {
    try {
      const int t = std::stoi(env);
      if (t >= 1) return t;
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("RNG_AUDIT_THREADS must be a positive integer, got ") +
                     env);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

void apply_config_json(const Json& j, RunConfig& c) {
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");
  static const std::vector<std::string> kKeys = {
      "suite",   "test",    "variant", "generator", "seed",    "tier",
      "n",       "N",       "Nprime",  "alpha",     "min_expect", "Jmin",
      "savir_t", "savir_m", "lag",     "threads",   "out",     "force",
      "budget",  "verbose"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
      throw UsageError("unknown config key: " + key);
    }
  }
  auto list = [](const Json& v) {
    if (v.is_array()) return v.get<std::vector<std::string>>();
    return split_list(v.get<std::string>());
  };
  try {
    if (j.contains("suite")) c.suite = j.at("suite").get<std::string>();
    if (j.contains("test")) c.tests = parse_test_list(list(j.at("test")));
    if (j.contains("variant")) {
      const auto v = j.at("variant").get<std::string>();
      c.variant = v == "both" ? std::nullopt : std::optional(parse_variant(v));
    }
    if (j.contains("generator")) c.generators = list(j.at("generator"));
    if (j.contains("seed")) c.seed_hex = j.at("seed").get<std::string>();
    if (j.contains("tier")) c.tier = parse_tier(j.at("tier").get<std::string>());
    if (j.contains("n")) c.n = optional_from<std::int64_t>(j, "n");
    if (j.contains("N")) c.N = optional_from<std::int64_t>(j, "N");
    if (j.contains("Nprime")) c.Nprime = optional_from<std::int64_t>(j, "Nprime");
    if (j.contains("alpha")) c.alpha = j.at("alpha").get<double>();
    if (j.contains("min_expect")) c.min_expect = j.at("min_expect").get<double>();
    if (j.contains("Jmin")) c.j_min = optional_from<std::int64_t>(j, "Jmin");
    if (j.contains("savir_t")) c.savir_t = optional_from<int>(j, "savir_t");
    if (j.contains("savir_m")) c.savir_m = optional_from<std::int64_t>(j, "savir_m");
    if (j.contains("lag")) c.lag = optional_from<int>(j, "lag");
    if (j.contains("threads")) c.threads = optional_from<int>(j, "threads");
    if (j.contains("out")) c.out = j.at("out").get<std::string>();
    if (j.contains("force")) c.force = j.at("force").get<bool>();
    if (j.contains("budget")) c.budget_seconds = j.at("budget").get<double>();
    if (j.contains("verbose")) c.verbose = j.at("verbose").get<bool>();
  } catch (const Json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["suite"] = c.suite;
  Json tests = Json::array();
  for (TestId id : c.tests) tests.push_back(std::string(to_string(id)));
  j["test"] = tests;
  j["variant"] = c.variant ? std::string(to_string(*c.variant)) : "both";
  j["generator"] = c.generators;
  j["seed"] = c.seed_hex;
  j["tier"] = std::string(to_string(c.tier));
  j["n"] = optional_to(c.n);
  j["N"] = c.resolved_N();
  j["Nprime"] = c.resolved_Nprime();
  j["alpha"] = c.alpha;
  j["min_expect"] = c.min_expect;
  j["Jmin"] = optional_to(c.j_min);
  j["savir_t"] = optional_to(c.savir_t);
  j["savir_m"] = optional_to(c.savir_m);
  j["lag"] = optional_to(c.lag);
  j["threads"] = c.resolved_threads();
  j["out"] = c.out;
  j["force"] = c.force;
  j["budget"] = c.budget_seconds;
  j["verbose"] = c.verbose;
  return j;
}

namespace {

struct CliValues {
  std::string suite, test, variant, generator, seed, tier, out, config;
  std::int64_t n = 0, N = 0, Nprime = 0, j_min = 0, savir_m = 0;
  double alpha = 0.0, min_expect = 0.0, budget = 0.0;
  int threads = 0, savir_t = 0, lag = 0;
  bool force = false, verbose = false;
};

std::unique_ptr<CLI::App> make_app(CliValues& v) {
  auto app = std::make_unique<CLI::App>(
      "Three-level audit of NIST SP800-22 and TestU01 randomness tests",
      "rng_audit");
  app->add_option("--config", v.config, "JSON config file (flags override it)");
  app->add_option("--suite", v.suite, "nist | smallcrush-subset | crush-subset | single");
  app->add_option("--test", v.test, "Test id(s), comma separated");
  app->add_option("--variant", v.variant, "original | modified | both");
  app->add_option("--generator", v.generator,
                  "mt19937 | sha1 | file:<path>, comma separated");
  app->add_option("--seed", v.seed, "Master seed as hex bytes");
  app->add_option("--tier", v.tier, "desk | paper");
  app->add_option("--n", v.n, "First-level sample size");
  app->add_option("--N", v.N, "First-level applications per batch");
  app->add_option("--Nprime", v.Nprime, "Number of batches");
  app->add_option("--alpha", v.alpha, "Level-2 significance level");
  app->add_option("--min-expect", v.min_expect, "Minimum expected count per category");
  app->add_option("--Jmin", v.j_min, "Random excursions minimum cycle count");
  app->add_option("--savir-t", v.savir_t, "Savir2 chain depth t");
  app->add_option("--savir-m", v.savir_m, "Savir2 bound m");
  app->add_option("--lag", v.lag, "SampleCorr lag k");
  app->add_option("--threads", v.threads, "Worker threads (env RNG_AUDIT_THREADS)");
  app->add_option("--out", v.out, "Output directory");
  app->add_option("--budget", v.budget, "Paper-tier runtime budget in seconds");
  app->add_flag("--force", v.force, "Run paper-tier tests over budget");
  app->add_flag("--verbose", v.verbose, "Log every batch");
  return app;
}

}  // namespace

std::string usage_text() {
  CliValues v;
  return make_app(v)->help();
}

RunConfig parse_cli(int argc, const char* const* argv) {
  if (argc <= 1) throw UsageError(usage_text());
  CliValues v;
  auto app = make_app(v);
  try {
    app->parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    throw;
  } catch (const CLI::ParseError& e) {
    throw UsageError(std::string(e.what()) + "\n\n" + usage_text());
  }
  auto given = [&](const char* name) { return app->count(name) > 0; };
  RunConfig c;
  if (given("--config")) {
    std::ifstream in(v.config);
    if (!in) throw UsageError("cannot read config file: " + v.config);
    Json j;
    try {
      j = Json::parse(in);
    } catch (const Json::exception& e) {
      throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    apply_config_json(j, c);
  }
  try {
    if (given("--suite")) c.suite = v.suite;
    if (given("--test")) {
      c.tests = parse_test_list(split_list(v.test));
      if (!given("--suite")) c.suite = "single";
    }
    if (given("--variant")) {
      c.variant = v.variant == "both" ? std::nullopt
                                      : std::optional(parse_variant(v.variant));
    }
    if (given("--generator")) c.generators = split_list(v.generator);
    if (given("--seed")) c.seed_hex = v.seed;
    if (given("--tier")) c.tier = parse_tier(v.tier);
    if (given("--n")) c.n = v.n;
    if (given("--N")) c.N = v.N;
    if (given("--Nprime")) c.Nprime = v.Nprime;
    if (given("--alpha")) c.alpha = v.alpha;
    if (given("--min-expect")) c.min_expect = v.min_expect;
    if (given("--Jmin")) c.j_min = v.j_min;
    if (given("--savir-t")) c.savir_t = v.savir_t;
    if (given("--savir-m")) c.savir_m = v.savir_m;
    if (given("--lag")) c.lag = v.lag;
    if (given("--threads")) c.threads = v.threads;
    if (given("--out")) c.out = v.out;
    if (given("--budget")) c.budget_seconds = v.budget;
    if (given("--force")) c.force = v.force;
    if (given("--verbose")) c.verbose = v.verbose;
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  return c;
}

std::vector<TestId> suite_tests(const std::string& suite) {
  if (suite == "nist") {
    return {TestId::kFrequency,
            TestId::kBlockFrequency,
            TestId::kCumulativeSums,
            TestId::kRuns,
            TestId::kLongestRun,
            TestId::kRank,
            TestId::kDft,
            TestId::kNonOverlappingTemplate,
            TestId::kOverlappingTemplate,
            TestId::kUniversal,
            TestId::kApproximateEntropy,
            TestId::kSerial,
            TestId::kLinearComplexity};
  }
  if (suite == "crush-subset" || suite == "smallcrush-subset") {
    return {TestId::kSampleCorr, TestId::kStringRun, TestId::kSavir2};
  }
  if (suite == "single") return {};
  throw UsageError("unknown suite: " + suite);
}

std::int64_t tier_n(Tier tier, TestId id) {
  const bool paper = tier == Tier::kPaper;
  switch (id) {
    case TestId::kUniversal:
      // The smallest n the suite accepts; 10^6 at the paper tier.
      return paper ? 1'000'000 : 387'840;
    case TestId::kRandomExcursions:
    case TestId::kRandomExcursionsVariant:
      return paper ? 10'000'000 : 1'000'000;
    case TestId::kSampleCorr:
      return paper ? 500'000'000 : 1'000'000;
    case TestId::kStringRun:
      return paper ? 1'000'000'000 : 100'000;
    case TestId::kSavir2:
      return paper ? 20'000'000 : 100'000;
    case TestId::kIdentity:
      return 1;
    default:
      return paper ? 1'000'000 : 100'000;
  }
}

std::vector<PlannedRun> plan_runs(const RunConfig& c) {
  if (std::find(known_suites().begin(), known_suites().end(), c.suite) ==
      known_suites().end()) {
    throw UsageError("unknown suite: " + c.suite);
  }
  std::vector<TestId> tests =
      c.suite == "single" ? c.tests : suite_tests(c.suite);
  if (c.suite != "single" && !c.tests.empty()) {
    throw UsageError("--test cannot be combined with --suite " + c.suite);
  }
  if (tests.empty()) throw UsageError("no tests selected (use --suite or --test)");
  if (c.generators.empty()) throw UsageError("no generator selected");
  if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw UsageError("alpha must be in (0, 1)");
  if (c.resolved_N() < 1 || c.resolved_Nprime() < 1) {
    throw UsageError("N and Nprime must be >= 1");
  }
  if (c.n && *c.n < 1) throw UsageError("n must be >= 1");
  if (c.j_min) {
    for (TestId id : tests) {
      if (!is_excursion_test(id)) {
        throw UsageError("--Jmin only applies to the random excursions tests, not " +
                         std::string(to_string(id)));
      }
    }
  }
  Bytes seed;
  try {
    seed = parse_hex(c.seed_hex);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
  const int threads = c.resolved_threads();
  std::vector<PlannedRun> out;
  for (const std::string& gen : c.generators) {
    try {
      GeneratorSpec::parse(gen, seed);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    for (TestId id : tests) {
      std::vector<Variant> variants;
      if (c.variant) {
        variants = {has_variants(id) ? *c.variant : Variant::kOriginal};
      } else if (has_variants(id)) {
        variants = {Variant::kOriginal, Variant::kModified};
      } else {
        variants = {Variant::kOriginal};
      }
      for (Variant v : variants) {
        TestDescriptor d;
        d.id = id;
        d.variant = v;
        d.n = c.n.value_or(tier_n(c.tier, id));
        d.params.j_min = c.j_min;
        if (c.lag) d.params.lag = *c.lag;
        if (c.savir_m) d.params.savir_m = *c.savir_m;
        d.params.savir_t = c.savir_t;
        PlannedRun run;
        try {
          run.test = d.resolved();
        } catch (const ConfigError& e) {
          throw UsageError(e.what());
        }
        run.generator = gen;
        run.estimated_seconds =
            application_seconds(run.test) *
            static_cast<double>(c.resolved_N() * c.resolved_Nprime()) / threads;
        if (c.tier == Tier::kPaper && !c.force &&
            run.estimated_seconds > c.budget_seconds) {
          throw UsageError("paper tier: " + std::string(to_string(id)) +
                           " is estimated at " +
                           std::to_string(static_cast<long long>(run.estimated_seconds)) +
                           " s, over the budget of " +
                           std::to_string(static_cast<long long>(c.budget_seconds)) +
                           " s; pass --force to run it anyway");
        }
        out.push_back(std::move(run));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records.

ReportRecord make_record(const HarnessReport& r, const RunConfig& config) {
  ReportRecord rec;
  rec.version = RNGAUDIT_VERSION;
  rec.suite = config.suite;
  rec.tier = std::string(to_string(config.tier));
  rec.test = r.test.id;
  rec.variant = r.test.variant;
  rec.index = r.index;
  rec.label = r.label;
  rec.generator = r.generator;
  rec.seed = r.seed_hex;
  rec.n = r.test.n;
  rec.N = r.N;
  rec.Nprime = r.Nprime;
  rec.alpha = r.alpha;
  rec.params = r.test.params;
  rec.T = r.T;
  rec.categories = r.categories;
  rec.category_probs = r.category_probs;
  rec.Y = r.Y;
  rec.h = r.h;
  rec.df = r.df;
  rec.pvalue3 = r.pvalue3 < kEpsThreshold ? 0.0 : r.pvalue3;
  rec.log10_pvalue3 = r.log10_pvalue3;
  rec.discard_count = r.discard_count;
  return rec;
}

Json record_to_json(const ReportRecord& r) {
  Json params;
  params["block_length"] = optional_to(r.params.block_length);
  params["pattern_length"] = optional_to(r.params.pattern_length);
  params["dft_d"] = optional_to(r.params.dft_d);
  params["j_min"] = optional_to(r.params.j_min);
  params["lag"] = r.params.lag;
  params["run_max_length"] = r.params.run_max_length;
  params["savir_m"] = r.params.savir_m;
  params["savir_t"] = optional_to(r.params.savir_t);
  params["merge_threshold"] = r.params.merge_threshold;

  Json j;
  j["version"] = r.version;
  j["suite"] = r.suite;
  j["tier"] = r.tier;
  j["test"] = std::string(to_string(r.test));
  j["test_name"] = std::string(display_name(r.test));
  j["variant"] = std::string(to_string(r.variant));
  j["index"] = r.index;
  j["label"] = r.label;
  j["generator"] = r.generator;
  j["seed"] = r.seed;
  j["n"] = r.n;
  j["N"] = r.N;
  j["Nprime"] = r.Nprime;
  j["alpha"] = r.alpha;
  j["params"] = params;
  j["T"] = r.T;
  j["categories"] = r.categories;
  j["category_probs"] = r.category_probs;
  j["Y"] = r.Y;
  j["h"] = r.h;
  j["df"] = r.df;
  if (r.pvalue3 == 0.0) {
    j["pvalue3"] = "eps";
  } else {
    j["pvalue3"] = r.pvalue3;
  }
  j["log10_pvalue3"] =
      std::isfinite(r.log10_pvalue3) ? Json(r.log10_pvalue3) : Json(nullptr);
  j["discard_count"] = r.discard_count;
  return j;
}

ReportRecord record_from_json(const Json& j) {
  ReportRecord r;
  try {
    r.version = j.at("version").get<std::string>();
    r.suite = j.at("suite").get<std::string>();
    r.tier = j.at("tier").get<std::string>();
    r.test = parse_test_id(j.at("test").get<std::string>());
    r.variant = parse_variant(j.at("variant").get<std::string>());
    r.index = j.at("index").get<int>();
    r.label = j.at("label").get<std::string>();
    r.generator = j.at("generator").get<std::string>();
    r.seed = j.at("seed").get<std::string>();
    r.n = j.at("n").get<std::int64_t>();
    r.N = j.at("N").get<std::int64_t>();
    r.Nprime = j.at("Nprime").get<std::int64_t>();
    r.alpha = j.at("alpha").get<double>();
    const Json& p = j.at("params");
    r.params.block_length = optional_from<int>(p, "block_length");
    r.params.pattern_length = optional_from<int>(p, "pattern_length");
    r.params.dft_d = optional_from<double>(p, "dft_d");
    r.params.j_min = optional_from<std::int64_t>(p, "j_min");
    r.params.lag = p.at("lag").get<int>();
    r.params.run_max_length = p.at("run_max_length").get<int>();
    r.params.savir_m = p.at("savir_m").get<std::int64_t>();
    r.params.savir_t = optional_from<int>(p, "savir_t");
    r.params.merge_threshold = p.at("merge_threshold").get<double>();
    r.T = j.at("T").get<std::vector<std::int64_t>>();
    r.categories = j.at("categories").get<std::vector<std::string>>();
    r.category_probs = j.at("category_probs").get<std::vector<double>>();
    r.Y = j.at("Y").get<std::vector<std::int64_t>>();
    r.h = j.at("h").get<double>();
    r.df = j.at("df").get<int>();
    const Json& p3 = j.at("pvalue3");
    r.pvalue3 = p3.is_string() ? 0.0 : p3.get<double>();
    const Json& l3 = j.at("log10_pvalue3");
    r.log10_pvalue3 = l3.is_null() ? -std::numeric_limits<double>::infinity()
                                   : l3.get<double>();
    r.discard_count = j.at("discard_count").get<std::int64_t>();
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed report record: ") + e.what());
  }
  return r;
}

std::string records_to_jsonl(const std::vector<ReportRecord>& records) {
  std::string out;
  for (const ReportRecord& r : records) {
    out += record_to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<ReportRecord> records_from_jsonl(const std::string& text) {
  std::vector<ReportRecord> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    out.push_back(record_from_json(Json::parse(line)));
  }
  return out;
}

namespace {

std::string table_cell_value(double p) {
  if (p == 0.0) return "eps";
  char buf[32];
  if (p >= 1e-3) {
    std::snprintf(buf, sizeof(buf), "%.2g", p);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1E", p);
  }
  return buf;
}

// Level-3 p-values above this count as a pass in the 148-template row.
constexpr double kTemplatePassThreshold = 1e-10;

}  // namespace

std::string records_to_table(const std::vector<ReportRecord>& records) {
  std::vector<std::string> row_names;
  std::vector<std::string> columns;
  std::map<std::pair<std::string, std::string>, std::vector<const ReportRecord*>>
      cells;
  for (const ReportRecord& r : records) {
    std::string row(display_name(r.test));
    if (is_excursion_test(r.test)) row += " " + r.label;
    const std::string col =
        std::string(r.variant == Variant::kOriginal ? "Original " : "Modified ") +
        r.generator;
    if (std::find(row_names.begin(), row_names.end(), row) == row_names.end()) {
      row_names.push_back(row);
    }
    if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
      columns.push_back(col);
    }
    cells[{row, col}].push_back(&r);
  }
  // Original columns first, generators in order of appearance.
  std::stable_sort(columns.begin(), columns.end(),
                   [](const std::string& a, const std::string& b) {
                     return a.starts_with("Original") && b.starts_with("Modified");
                   });
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"Test Name"};
  header.insert(header.end(), columns.begin(), columns.end());
  grid.push_back(header);
  for (const std::string& row : row_names) {
    std::vector<std::string> line = {row};
    for (const std::string& col : columns) {
      auto it = cells.find({row, col});
      if (it == cells.end()) {
        line.push_back("-");
        continue;
      }
      const auto& recs = it->second;
      if (recs.front()->test == TestId::kNonOverlappingTemplate) {
        std::int64_t passed = 0;
        for (const ReportRecord* r : recs) {
          passed += r->pvalue3 > kTemplatePassThreshold;
        }
        line.push_back(std::to_string(passed) + "/" + std::to_string(recs.size()));
        continue;
      }
      std::string cell;
      for (const ReportRecord* r : recs) {
        if (!cell.empty()) cell += ", ";
        cell += table_cell_value(r->pvalue3);
      }
      line.push_back(cell);
    }
    grid.push_back(line);
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t i = 0; i < line.size(); ++i) {
      width[i] = std::max(width[i], line[i].size());
    }
  }
  std::string out;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    std::string text;
    for (std::size_t i = 0; i < grid[k].size(); ++i) {
      if (i > 0) text += " | ";
      std::string cell = grid[k][i];
      cell.resize(width[i], ' ');
      text += cell;
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + "\n";
    if (k == 0 && grid.size() > 1) {
      std::string rule;
      for (std::size_t i = 0; i < width.size(); ++i) {
        if (i > 0) rule += "-+-";
        rule += std::string(width[i], '-');
      }
      out += rule + "\n";
    }
  }
  return out;
}

void emit_report(const std::vector<ReportRecord>& records,
                 const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw OutputError("cannot create output directory " + dir + ": " +
                      ec.message());
  }
  auto write = [&](const std::string& name, const std::string& content) {
    const fs::path path = fs::path(dir) / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw OutputError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw OutputError("failed writing " + path.string());
  };
  write("report.jsonl", records_to_jsonl(records));
  write("report.txt", records_to_table(records));
}

}  // namespace rngaudit
