#pragma once

// Two- and three-level meta-tests. Level 1 yields p-values, level 2 counts
// those >= alpha per batch of N, level 3 compares the N' counts against
// B(N, 1 - alpha) with a chi-square goodness-of-fit test.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rngaudit/bitstream.hpp"
#include "rngaudit/level1.hpp"

namespace rngaudit {

struct Categorization {
  std::int64_t N = 0;
  double alpha = 0.0;
  // Category i holds the counts first[i] .. last[i].
  std::vector<std::int64_t> first;
  std::vector<std::int64_t> last;
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  std::size_t category_of(std::int64_t t) const;
  // "{0..981}", "{990}".
  std::string describe(std::size_t i) const;
};

// Greedy merge of both tails of B(N, 1 - alpha) until every category has
// expected count Nprime * p >= min_expect.
Categorization build_categories(std::int64_t N, double alpha,
                                std::int64_t Nprime, double min_expect);

// Number of p-values >= alpha. Throws ConsistencyError on p outside [0, 1].
std::int64_t level2_count(std::span<const double> pvalues, double alpha);

struct Level3Result {
  std::vector<std::int64_t> Y;
  double h = 0.0;
  int df = 0;
  double pvalue = 1.0;
  double log10_pvalue = 0.0;
};
Level3Result level3_gof(std::span<const std::int64_t> T,
                        const Categorization& cat);

struct HarnessConfig {
  GeneratorSpec generator;
  std::int64_t N = 1000;
  std::int64_t Nprime = 1000;
  double alpha = 0.01;
  double min_expect = 5.0;
  int threads = 1;
  // Called once per finished batch (from worker threads, serialized).
  std::function<void(const std::string&)> log;
};

struct HarnessReport {
  TestDescriptor test;
  int index = 0;          // p-value index within the test's arity
  std::string label;      // "p", "x=-4", "forward", ...
  std::string generator;  // generator name
  std::string seed_hex;
  std::int64_t N = 0;
  std::int64_t Nprime = 0;
  double alpha = 0.0;
  std::vector<std::int64_t> T;
  std::vector<std::string> categories;
  std::vector<double> category_probs;
  std::vector<std::int64_t> Y;
  double h = 0.0;
  int df = 0;
  double pvalue3 = 1.0;
  double log10_pvalue3 = 0.0;
  std::int64_t discard_count = 0;
  double seconds = 0.0;  // wall time of the whole run (not per index)
};

// Applies the test N * Nprime times. Slot j of batch i reads generator stream
// i * N + j; a discarded application retries on the same stream's next bits.
// Throws InapplicableTest when a slot keeps discarding.
std::vector<HarnessReport> run_three_level(const TestDescriptor& test,
                                           const HarnessConfig& config);

struct TwoLevelResult {
  int index = 0;
  std::string label;
  std::vector<std::int64_t> bins;  // 10 equal-width bins over [0, 1]
  double chi2 = 0.0;
  double pvalue = 1.0;
  std::int64_t discard_count = 0;
};
// Uniformity chi-square (9 df) of N level-1 p-values, one result per index.
TwoLevelResult two_level_gof(std::span<const double> pvalues);
std::vector<TwoLevelResult> run_two_level(const TestDescriptor& test,
                                          const HarnessConfig& config);

// A slot gives up after this many consecutive discards.
inline constexpr int kMaxDiscardsPerSlot = 200;

}  // namespace rngaudit
