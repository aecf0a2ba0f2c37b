#include "rngaudit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <optional>
#include <thread>

#include "rngaudit/errors.hpp"
#include "rngaudit/numerics.hpp"

namespace rngaudit {

std::size_t Categorization::category_of(std::int64_t t) const {
  if (t < 0 || t > N) {
    throw ConsistencyError("level-2 count " + std::to_string(t) +
                           " outside [0, N]");
  }
  const auto it = std::upper_bound(first.begin(), first.end(), t);
  return static_cast<std::size_t>(it - first.begin()) - 1;
}

std::string Categorization::describe(std::size_t i) const {
  if (first[i] == last[i]) return "{" + std::to_string(first[i]) + "}";
  return "{" + std::to_string(first[i]) + ".." + std::to_string(last[i]) + "}";
}

Categorization build_categories(std::int64_t N, double alpha,
                                std::int64_t Nprime, double min_expect) {
  if (N < 1) throw ConfigError("N must be >= 1");
  if (Nprime < 1) throw ConfigError("N' must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must be in (0, 1)");
  if (!(min_expect > 0.0)) throw ConfigError("min_expect must be > 0");
  const double p = 1.0 - alpha;
  std::vector<double> pmf(static_cast<std::size_t>(N) + 1);
  for (std::int64_t j = 0; j <= N; ++j) {
    pmf[static_cast<std::size_t>(j)] = binom_logpmf(N, p, j).prob();
  }
  const double need = min_expect / static_cast<double>(Nprime);
  auto fail = [&] {
    throw ConfigError("cannot form two categories with expected count >= " +
                      std::to_string(min_expect) + " (N=" + std::to_string(N) +
                      ", N'=" + std::to_string(Nprime) + ")");
  };
  // Lower tail [0, lo], upper tail [hi, N].
  std::int64_t lo = 0;
  double lower = pmf[0];
  while (lower < need && lo < N) lower += pmf[static_cast<std::size_t>(++lo)];
  std::int64_t hi = N;
  double upper = pmf[static_cast<std::size_t>(N)];
  while (upper < need && hi > lo + 1) upper += pmf[static_cast<std::size_t>(--hi)];
  if (lower < need || upper < need || hi <= lo) fail();
  // Singletons between the tails that are still too small join a tail.
  while (lo + 1 < hi && pmf[static_cast<std::size_t>(lo + 1)] < need) {
    lower += pmf[static_cast<std::size_t>(++lo)];
  }
  while (hi - 1 > lo && pmf[static_cast<std::size_t>(hi - 1)] < need) {
    upper += pmf[static_cast<std::size_t>(--hi)];
  }
  Categorization cat;
  cat.N = N;
  cat.alpha = alpha;
  cat.first.push_back(0);
  cat.last.push_back(lo);
  cat.probs.push_back(lower);
  for (std::int64_t j = lo + 1; j < hi; ++j) {
    cat.first.push_back(j);
    cat.last.push_back(j);
    cat.probs.push_back(pmf[static_cast<std::size_t>(j)]);
  }
  cat.first.push_back(hi);
  cat.last.push_back(N);
  cat.probs.push_back(upper);
  return cat;
}

std::int64_t level2_count(std::span<const double> pvalues, double alpha) {
  std::int64_t count = 0;
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConsistencyError("level-1 p-value outside [0, 1]: " +
                             std::to_string(p));
    }
    count += p >= alpha;
  }
  return count;
}

Level3Result level3_gof(std::span<const std::int64_t> T,
                        const Categorization& cat) {
  Level3Result out;
  out.Y.assign(cat.size(), 0);
  for (std::int64_t t : T) ++out.Y[cat.category_of(t)];
  const double nprime = static_cast<double>(T.size());
  for (std::size_t i = 0; i < cat.size(); ++i) {
    const double expected = nprime * cat.probs[i];
    const double diff = static_cast<double>(out.Y[i]) - expected;
    out.h += diff * diff / expected;
  }
  out.df = static_cast<int>(cat.size()) - 1;
  out.pvalue = chi2_sf(out.df, out.h);
  out.log10_pvalue = chi2_log_sf(out.df, out.h) / std::numbers::ln10;
  return out;
}

namespace {

struct BatchResult {
  std::vector<std::int64_t> counts;  // per p-value index
  std::int64_t discards = 0;
};

// One successful level-1 application on `source`, retrying discards.
TestOutcome apply_until_kept(const TestDescriptor& test, BitSource& source,
                             std::int64_t& discards) {
  int streak = 0;
  for (;;) {
    TestOutcome outcome = run_level1(test, source);
    if (!outcome.discarded) {
      if (static_cast<int>(outcome.pvalues.size()) != test.arity()) {
        throw ConsistencyError("level-1 test returned " +
                               std::to_string(outcome.pvalues.size()) +
                               " p-values, expected " +
                               std::to_string(test.arity()));
      }
      return outcome;
    }
    if (!is_excursion_test(test.id)) {
      throw ConsistencyError("only the random excursions tests may discard");
    }
    ++discards;
    if (++streak >= kMaxDiscardsPerSlot) {
      throw InapplicableTest(
          "test inapplicable at this n: " + std::to_string(streak) +
          " consecutive discards (last J = " +
          std::to_string(outcome.observed_j.value_or(-1)) + ", J_min = " +
          std::to_string(test.params.j_min.value_or(0)) + ")");
    }
  }
}

void check_config(const HarnessConfig& config) {
  if (config.N < 1) throw ConfigError("N must be >= 1");
  if (config.Nprime < 1) throw ConfigError("N' must be >= 1");
  if (!(config.alpha > 0.0 && config.alpha < 1.0)) {
    throw ConfigError("alpha must be in (0, 1)");
  }
  if (config.threads < 1) throw ConfigError("threads must be >= 1");
}

// Runs `work(batch, source)` for every batch. Streamable generators give
// every slot its own stream and batches run on a worker pool; a file is one
// sequential stream shared by all batches in order.
template <typename Work>
std::vector<BatchResult> for_each_batch(const HarnessConfig& config,
                                        std::int64_t batches, Work work) {
  std::vector<BatchResult> results(static_cast<std::size_t>(batches));
  std::mutex log_mutex;
  auto report = [&](std::int64_t b) {
    if (!config.log) return;
    std::lock_guard lock(log_mutex);
    config.log("batch " + std::to_string(b + 1) + "/" + std::to_string(batches));
  };
  if (!config.generator.is_streamable()) {
    BitSource shared = BitSource::make(config.generator, 0);
    for (std::int64_t b = 0; b < batches; ++b) {
      results[static_cast<std::size_t>(b)] = work(b, &shared);
      report(b);
    }
    return results;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      if (failed.load()) return;
      const std::int64_t b = next.fetch_add(1);
      if (b >= batches) return;
      try {
        results[static_cast<std::size_t>(b)] = work(b, nullptr);
        report(b);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  const int threads = static_cast<int>(
      std::min<std::int64_t>(config.threads, std::max<std::int64_t>(batches, 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
  return results;
}

}  // namespace

std::vector<HarnessReport> run_three_level(const TestDescriptor& test_in,
                                           const HarnessConfig& config) {
  check_config(config);
  const TestDescriptor test = test_in.resolved();
  const Categorization cat =
      build_categories(config.N, config.alpha, config.Nprime, config.min_expect);
  const int arity = test.arity();
  const auto start = std::chrono::steady_clock::now();

  auto work = [&](std::int64_t batch, BitSource* shared) {
    BatchResult r;
    r.counts.assign(static_cast<std::size_t>(arity), 0);
    for (std::int64_t slot = 0; slot < config.N; ++slot) {
      std::optional<BitSource> own;
      if (!shared) {
        own.emplace(BitSource::make(
            config.generator, static_cast<std::uint64_t>(batch * config.N + slot)));
      }
      BitSource& source = shared ? *shared : *own;
      const TestOutcome outcome = apply_until_kept(test, source, r.discards);
      for (int a = 0; a < arity; ++a) {
        r.counts[static_cast<std::size_t>(a)] +=
            level2_count(std::span(&outcome.pvalues[a], 1), config.alpha);
      }
    }
    return r;
  };
  const std::vector<BatchResult> batches =
      for_each_batch(config, config.Nprime, work);
  const double seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();

  std::int64_t discards = 0;
  for (const BatchResult& b : batches) discards += b.discards;
  const std::vector<std::string> labels = test.statistic_labels();
  std::vector<std::string> cat_names;
  for (std::size_t i = 0; i < cat.size(); ++i) cat_names.push_back(cat.describe(i));

  std::vector<HarnessReport> reports;
  for (int a = 0; a < arity; ++a) {
    HarnessReport rep;
    rep.test = test;
    rep.index = a;
    rep.label = labels[static_cast<std::size_t>(a)];
    rep.generator = config.generator.name();
    rep.seed_hex = to_hex(config.generator.master_seed);
    rep.N = config.N;
    rep.Nprime = config.Nprime;
    rep.alpha = config.alpha;
    for (const BatchResult& b : batches) {
      rep.T.push_back(b.counts[static_cast<std::size_t>(a)]);
    }
    const Level3Result l3 = level3_gof(rep.T, cat);
    rep.categories = cat_names;
    rep.category_probs = cat.probs;
    rep.Y = l3.Y;
    rep.h = l3.h;
    rep.df = l3.df;
    rep.pvalue3 = l3.pvalue;
    rep.log10_pvalue3 = l3.log10_pvalue;
    rep.discard_count = discards;
    rep.seconds = seconds;
    reports.push_back(std::move(rep));
  }
  return reports;
}

TwoLevelResult two_level_gof(std::span<const double> pvalues) {
  if (pvalues.empty()) throw ConfigError("two-level test needs N >= 1");
  TwoLevelResult out;
  out.bins.assign(10, 0);
  for (double p : pvalues) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ConsistencyError("level-1 p-value outside [0, 1]");
    }
    ++out.bins[static_cast<std::size_t>(std::min(9.0, std::floor(p * 10.0)))];
  }
  const double expected = static_cast<double>(pvalues.size()) / 10.0;
  for (std::int64_t c : out.bins) {
    const double diff = static_cast<double>(c) - expected;
    out.chi2 += diff * diff / expected;
  }
  out.pvalue = chi2_sf(9, out.chi2);
  return out;
}

std::vector<TwoLevelResult> run_two_level(const TestDescriptor& test_in,
                                          const HarnessConfig& config) {
  check_config(config);
  const TestDescriptor test = test_in.resolved();
  const int arity = test.arity();
  std::vector<std::vector<double>> pvalues(static_cast<std::size_t>(arity));
  std::int64_t discards = 0;
  std::optional<BitSource> shared;
  if (!config.generator.is_streamable()) {
    shared.emplace(BitSource::make(config.generator, 0));
  }
  for (std::int64_t slot = 0; slot < config.N; ++slot) {
    std::optional<BitSource> own;
    if (!shared) {
      own.emplace(BitSource::make(config.generator, static_cast<std::uint64_t>(slot)));
    }
    BitSource& source = shared ? *shared : *own;
    const TestOutcome outcome = apply_until_kept(test, source, discards);
    for (int a = 0; a < arity; ++a) {
      pvalues[static_cast<std::size_t>(a)].push_back(
          outcome.pvalues[static_cast<std::size_t>(a)]);
    }
  }
  const std::vector<std::string> labels = test.statistic_labels();
  std::vector<TwoLevelResult> out;
  for (int a = 0; a < arity; ++a) {
    TwoLevelResult r = two_level_gof(pvalues[static_cast<std::size_t>(a)]);
    r.index = a;
    r.label = labels[static_cast<std::size_t>(a)];
    r.discard_count = discards;
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rngaudit
