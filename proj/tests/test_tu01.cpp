#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/rational.hpp>
#include <cmath>
#include <random>

#include "rngaudit/errors.hpp"
#include "rngaudit/tu01.hpp"

namespace rngaudit::tu01 {
namespace {

using Rational = boost::rational<boost::multiprecision::cpp_int>;

TEST(SampleCorr, ConstantHalf) {
  const std::vector<double> halves(50, 0.5);
  for (Variant v : {Variant::kOriginal, Variant::kModified}) {
    EXPECT_EQ(sample_corr_statistic(halves, 1, v), 0.0);
    EXPECT_EQ(sample_corr_test(halves, 1, v), 1.0);
  }
  EXPECT_THROW(sample_corr_test(halves, 50, Variant::kModified), ConfigError);
}

TEST(SampleCorr, ModifiedMomentsMonteCarlo) {
  // n = 101, k = 1: 100 lag products, mean product has variance 1/14400.
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const int trials = 1'000'000;
  std::vector<double> x(101);
  double sum = 0.0, sum2 = 0.0, zsum = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (auto& v : x) v = u(g);
    const double z = sample_corr_statistic(x, 1, Variant::kModified);
    const double mean_product = z * std::sqrt(1.0 / 14400.0);
    sum += mean_product;
    sum2 += mean_product * mean_product;
    zsum += z;
  }
  const double mean = sum / trials;
  const double var = sum2 / trials - mean * mean;
  EXPECT_NEAR(var * 14400.0, 1.0, 0.05);
  EXPECT_NEAR(zsum / trials, 0.0, 3.0 / std::sqrt(double(trials)));
}

TEST(SampleCorr, ComplementInvariance) {
  std::mt19937_64 g(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(1000), y(1000);
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = u(g);
    y[i] = 1.0 - x[i];
  }
  EXPECT_NEAR(sample_corr_statistic(x, 3, Variant::kModified),
              sample_corr_statistic(y, 3, Variant::kModified), 1e-12);
}

TEST(SampleCorr, SourceMatchesSpan) {
  const GeneratorSpec spec;
  BitSource a = BitSource::make(spec, 3);
  BitSource b = BitSource::make(spec, 3);
  std::vector<double> reals(5000);
  for (auto& r : reals) r = a.uniform01();
  for (Variant v : {Variant::kOriginal, Variant::kModified}) {
    BitSource c = BitSource::make(spec, 3);
    EXPECT_NEAR(sample_corr_test(c, 5000, 2, v), sample_corr_test(reals, 2, v), 1e-12);
  }
  (void)b;
}

TEST(StringRun, Alternating) {
  BitBlock bits(201);
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = i % 2;
  const RunCounts counts = count_runs(bits, 100, 30);
  EXPECT_EQ(counts.bits, 200);
  EXPECT_EQ(counts.zeros[0], 100);
  EXPECT_EQ(counts.ones[0], 100);
  const StringRunResult mod = string_run_statistics(counts, Variant::kModified);
  EXPECT_DOUBLE_EQ(mod.normal_statistic, -10.0);
  const StringRunResult orig = string_run_statistics(counts, Variant::kOriginal);
  EXPECT_DOUBLE_EQ(orig.normal_statistic, -200.0 / std::sqrt(800.0));
}

TEST(StringRun, SourceAgreesWithSpan) {
  const GeneratorSpec spec;
  BitSource a = BitSource::make(spec, 9);
  BitSource b = BitSource::make(spec, 9);
  const RunCounts from_source = count_runs(a, 500, 10);
  const BitBlock bits = b.take_bits(static_cast<std::size_t>(from_source.bits) + 1);
  const RunCounts from_span = count_runs(bits, 500, 10);
  EXPECT_EQ(from_source.zeros, from_span.zeros);
  EXPECT_EQ(from_source.ones, from_span.ones);
  EXPECT_EQ(from_source.bits, from_span.bits);
  EXPECT_EQ(a.bits_consumed(), static_cast<std::uint64_t>(from_source.bits));
}

TEST(StringRun, TotalLengthMomentsMonteCarlo) {
  // Y = total length of 2n runs: E[Y] = V[Y] = 4n.
  std::mt19937_64 g(12);
  const int n = 50, trials = 40000;
  BitBlock bits(2000);
  double sum = 0.0, sum2 = 0.0;
  for (int t = 0; t < trials; ++t) {
    for (auto& b : bits) b = static_cast<std::uint8_t>(g() & 1);
    const double y = static_cast<double>(count_runs(bits, n, 30).bits);
    sum += y;
    sum2 += y * y;
  }
  const double mean = sum / trials;
  const double var = sum2 / trials - mean * mean;
  EXPECT_NEAR(mean, 4.0 * n, 4.0 * std::sqrt(4.0 * n / trials));
  EXPECT_NEAR(var / (4.0 * n), 1.0, 0.04);
}

TEST(StringRun, ShortSourceThrows) {
  const BitBlock bits = {0, 1, 0};
  EXPECT_THROW(count_runs(bits, 5, 10), InsufficientInput);
}

// P(I_t = v) by the recurrence in exact rationals.
std::vector<Rational> savir_oracle(int m, int t) {
  std::vector<Rational> p(m, Rational(1, m));
  for (int s = 2; s <= t; ++s) {
    std::vector<Rational> next(m, Rational(0));
    for (int j = 1; j <= m; ++j) {
      for (int v = 1; v <= j; ++v) next[v - 1] += p[j - 1] / j;
    }
    p = next;
  }
  return p;
}

double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

TEST(Savir2, ExactProbabilities) {
  EXPECT_EQ(savir2_cell_probs(2, 2), (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(savir2_cell_probs(4, 1), (std::vector<double>(4, 0.25)));
  const auto oracle = savir_oracle(4, 3);
  const auto probs = savir2_cell_probs(4, 3);
  for (int v = 0; v < 4; ++v) EXPECT_NEAR(probs[v], to_double(oracle[v]), 1e-15);
  const auto big = savir_oracle(12, 5);
  const auto big_probs = savir2_cell_probs(12, 5);
  for (int v = 0; v < 12; ++v) EXPECT_NEAR(big_probs[v], to_double(big[v]), 1e-15);
}

TEST(Savir2, MonotoneAndNormalized) {
  const auto probs = savir2_cell_probs(1 << 20, 9);
  double total = 0.0;
  for (std::size_t v = 0; v < probs.size(); ++v) {
    total += probs[v];
    if (v > 0) ASSERT_LE(probs[v], probs[v - 1]);
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
}

TEST(Savir2, MergeCells) {
  const std::vector<double> probs = {0.5, 0.3, 0.1, 0.05, 0.05};
  const auto groups = merge_cells(probs, 100, 5.0);
  // From the top: {5} = 5, {4} = 5, {3} = 10, {2} = 30, {1} = 50.
  ASSERT_EQ(groups.size(), 5u);
  const auto coarse = merge_cells(probs, 40, 5.0);
  // need 0.125: {3..5} = 0.2, {2} = 0.3, {1} = 0.5.
  ASSERT_EQ(coarse.size(), 3u);
  EXPECT_EQ(coarse[0].first, 1);
  EXPECT_EQ(coarse[2].first, 3);
  EXPECT_EQ(coarse[2].last, 5);
  EXPECT_NEAR(coarse[2].prob, 0.2, 1e-15);
  EXPECT_THROW(merge_cells(probs, 5, 5.0), ConfigError);
}

TEST(Savir2, ExactCountsGiveUnitPvalue) {
  SavirParams params{4, 2, 4800, 5.0};
  const auto probs = savir2_cell_probs(4, 2);
  std::vector<std::int64_t> counts;
  for (double p : probs) counts.push_back(std::llround(p * 4800));
  EXPECT_NEAR(savir2_pvalue(counts, params), 1.0, 1e-12);
}

TEST(Savir2, ChiSquareMeanNearDf) {
  const SavirParams params{4, 2, 10000, 5.0};
  const auto probs = savir2_cell_probs(4, 2);
  std::mt19937 g(77);
  const int reps = 1000;
  double total = 0.0;
  for (int r = 0; r < reps; ++r) {
    std::vector<std::int64_t> counts(4, 0);
    for (int i = 0; i < params.n; ++i) {
      std::uint64_t v = (4ull * g() >> 32) + 1;
      v = (v * g() >> 32) + 1;
      ++counts[v - 1];
    }
    double chi2 = 0.0;
    for (int v = 0; v < 4; ++v) {
      const double e = params.n * probs[v];
      chi2 += (counts[v] - e) * (counts[v] - e) / e;
    }
    total += chi2;
  }
  EXPECT_NEAR(total / reps / 3.0, 1.0, 0.1);
}

TEST(Savir2, SourceDeterministic) {
  const SavirParams params{1 << 10, 3, 2000, 5.0};
  const GeneratorSpec spec;
  BitSource a = BitSource::make(spec, 1);
  BitSource b = BitSource::make(spec, 1);
  EXPECT_EQ(savir2_test(a, params), savir2_test(b, params));
  EXPECT_EQ(a.bits_consumed(), 32u * 3 * 2000);
}

}  // namespace
}  // namespace rngaudit::tu01
