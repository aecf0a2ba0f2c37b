#pragma once

// Tests taken from TestU01 that consume reals or runs rather than a fixed
// bit block: svaria_SampleCorr, sstring_Run and smarsa_Savir2.

#include <cstdint>
#include <span>
#include <vector>

#include "rngaudit/bitstream.hpp"
#include "rngaudit/level1.hpp"

namespace rngaudit::tu01 {

// ---- SampleCorr -----------------------------------------------------------

// Normalized statistic z (asymptotically N(0,1) under the chosen variant).
double sample_corr_statistic(std::span<const double> reals, int lag,
                             Variant variant);
double sample_corr_test(std::span<const double> reals, int lag, Variant variant);
// Streams n uniform01 draws from the source.
double sample_corr_test(BitSource& source, std::int64_t n, int lag,
                        Variant variant);

// ---- sstring_Run ----------------------------------------------------------

struct RunCounts {
  // zeros[i - 1], ones[i - 1]: runs of length i; the last entry collects
  // runs of length >= max_length.
  std::vector<std::int64_t> zeros;
  std::vector<std::int64_t> ones;
  std::int64_t pairs = 0;  // n: 2n runs were read
  std::int64_t bits = 0;   // Y
};

// Reads 2n consecutive runs; consumes exactly Y bits.
RunCounts count_runs(BitSource& source, std::int64_t pairs, int max_length);
RunCounts count_runs(std::span<const std::uint8_t> bits, std::int64_t pairs,
                     int max_length);

struct StringRunResult {
  double normal_statistic;
  double p_normal;
  double chi2;
  int classes;  // length classes kept per bit value
  int df;
  double p_chi2;
};
StringRunResult string_run_statistics(const RunCounts& counts, Variant variant);
StringRunResult string_run_test(BitSource& source, std::int64_t pairs,
                                int max_length, Variant variant);

// ---- Savir2 ---------------------------------------------------------------

struct SavirParams {
  std::int64_t m = 1 << 20;
  int t = 9;
  std::int64_t n = 1'000'000;
  double merge_threshold = 5.0;
};

// probs[v - 1] = P(I_t = v) for v = 1..m.
std::vector<double> savir2_cell_probs(std::int64_t m, int t);

// Consecutive value ranges [first, last] treated as one χ² cell.
struct CellGroup {
  std::int64_t first;
  std::int64_t last;
  double prob;
};
// Merges from the high-value end until every expected count n p >= threshold.
// Throws ConfigError when fewer than two cells remain.
std::vector<CellGroup> merge_cells(std::span<const double> probs,
                                   std::int64_t n, double threshold);

// counts[v - 1] = number of draws with I_t = v.
double savir2_pvalue(std::span<const std::int64_t> counts,
                     const SavirParams& params);
double savir2_test(BitSource& source, const SavirParams& params);

}  // namespace rngaudit::tu01
