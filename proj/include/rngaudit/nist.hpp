#pragma once

// First-level tests of the NIST SP800-22 rev. 1a suite (sts 2.1.2). Each test
// is a pure function of a bit block (one 0/1 value per element). Where the
// audit prescribes a fix, a Variant selects the legacy behaviour or the fix.

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "rngaudit/level1.hpp"

namespace rngaudit::nist {

using Bits = std::span<const std::uint8_t>;
using BigInt = boost::multiprecision::cpp_int;

double frequency_test(Bits bits);
double block_frequency_test(Bits bits, int block_length);

// {forward, backward}.
std::array<double, 2> cumulative_sums_test(Bits bits);
// P-value of the cumulative sums statistic z = max |S_k| for a walk of n steps.
double cumulative_sums_pvalue(std::int64_t n, std::int64_t z);

double runs_test(Bits bits);

// ---- Longest run of ones in a block ---------------------------------------

// Block layout chosen by n: (M=8, classes <=1..>=4), (M=128, <=4..>=9) or
// (M=10^4, <=10..>=16).
struct LongestRunLayout {
  int block_bits;
  int lowest;   // first class collects longest runs <= lowest
  int highest;  // last class collects longest runs >= highest
  std::vector<double> legacy_probs;
};
LongestRunLayout longest_run_layout(std::int64_t n);

// Number of M-bit strings in each longest-run class {<=lo, lo+1, ..., >=hi};
// dividing by 2^M gives the exact class probabilities.
std::vector<BigInt> longest_run_class_counts(int block_bits, int lowest,
                                             int highest);
// Exact class probabilities rounded to 15 decimal places.
std::vector<double> longest_run_class_probs(int block_bits, int lowest,
                                            int highest);
double longest_run_test(Bits bits, Variant variant);

// ---- Binary matrix rank ---------------------------------------------------

// Rank over GF(2) of a matrix whose rows are given as bit masks.
int gf2_rank(std::span<std::uint32_t> rows);
double rank_test(Bits bits);

// ---- Discrete Fourier transform -------------------------------------------

struct DftResult {
  std::int64_t below_threshold;  // o_h
  double threshold;              // h = sqrt(n ln 20)
  double statistic;              // (o_h - 0.95 n / 2) / sqrt(0.05 0.95 n / d)
  double pvalue;
};
// Moduli |F_i| for i = 0 .. n/2 - 1 of the DFT of 2X_k - 1.
std::vector<double> dft_moduli(Bits bits);
DftResult dft_statistic(Bits bits, double d);
double dft_test(Bits bits, double d);
inline constexpr double kDftOriginalD = 4.0;
inline constexpr double kDftModifiedD = 3.8;

// ---- Template matching ----------------------------------------------------

// Aperiodic (border-free) m-bit templates in ascending numeric order, MSB of
// each value being the first template bit. 148 templates for m = 9.
std::vector<std::uint32_t> aperiodic_templates(int m);
inline constexpr int kNonOverlappingTemplateCount = 148;
std::vector<double> non_overlapping_template_test(Bits bits, int m = 9);

// Number of M-bit windows in each class {0, 1, ..., K-1, >=K} of overlapping
// occurrence counts of the all-ones template of length m.
std::vector<BigInt> overlap_occurrence_counts(int m, int window_bits,
                                              int classes = 5);
std::vector<double> overlap_occurrence_probs(int m, int window_bits,
                                             int classes = 5);
// The approximation the audited code falls back to (Pr(u, eta) with
// eta = (M - m + 1) / 2^(m+1)).
std::vector<double> overlap_legacy_probs(int m, int window_bits,
                                         int classes = 5);
double overlapping_template_test(Bits bits, Variant variant);

// ---- Maurer's universal statistical test ----------------------------------

struct UniversalLayout {
  int L;
  std::int64_t Q;  // initialization blocks
  std::int64_t K;  // test blocks
};
// Throws InsufficientInput below n = 387840 (L = 6).
UniversalLayout universal_layout(std::int64_t n);

enum class GapScore { kLog2, kCoron };
// Score of a gap i >= 1: log2(i), or Coron's (1/ln 2) sum_{k<i} 1/k.
double gap_score(GapScore score, std::int64_t gap);
// E[score(A)] for A geometric with parameter 2^-L, by the series
// 2^-L sum_{i>=1} (1 - 2^-L)^(i-1) score(i) truncated at relative tail 1e-12.
double universal_expectation(int L, GapScore score);
// Var[score(A)] for the same geometric A.
double universal_score_variance(int L, GapScore score);
// Exact variance of the mean of K consecutive scores of an i.i.d. uniform
// block sequence, including the covariance between overlapping gaps.
double universal_statistic_variance(int L, std::int64_t K, GapScore score);
// Legacy tables of the audited code, indexed by L.
double universal_legacy_expectation(int L);
double universal_legacy_variance(int L);

struct UniversalResult {
  double statistic;
  double expectation;
  double sigma;
  double pvalue;
};
UniversalResult universal_statistic(Bits bits, Variant variant);
double universal_test(Bits bits, Variant variant);

// ---- Entropy / serial -----------------------------------------------------

double approximate_entropy_test(Bits bits, int m);
// {del psi^2, del^2 psi^2} p-values.
std::array<double, 2> serial_test(Bits bits, int m);

// ---- Linear complexity ----------------------------------------------------

// Length of the shortest LFSR generating the sequence.
int berlekamp_massey(Bits bits);
double linear_complexity_test(Bits bits, int block_length);

// ---- Random excursions ----------------------------------------------------

inline constexpr std::array<int, 8> kExcursionStates = {-4, -3, -2, -1,
                                                        1,  2,  3,  4};
inline constexpr std::array<int, 18> kVariantStates = {
    -9, -8, -7, -6, -5, -4, -3, -2, -1, 1, 2, 3, 4, 5, 6, 7, 8, 9};

struct WalkSummary {
  std::int64_t cycles = 0;  // J
  // visits[s][k]: cycles visiting kExcursionStates[s] exactly k times (k = 5
  // means 5 or more).
  std::array<std::array<std::int64_t, 6>, 8> visits{};
  // total_visits[s]: visits to kVariantStates[s] over the whole walk.
  std::array<std::int64_t, 18> total_visits{};

  std::int64_t visit_count(int x, int k) const;
  std::int64_t total_visit_count(int x) const;
};

// Cycles of the padded walk (0, S_1, ..., S_n, 0): J = (zeros in it) - 1.
WalkSummary walk_summary(Bits bits);

// Probability that a cycle visits x exactly k times (k = 5: 5 or more).
double excursion_pi(int x, int k);

TestOutcome random_excursions_test(const WalkSummary& summary,
                                   std::int64_t j_min);
TestOutcome random_excursions_variant_test(const WalkSummary& summary,
                                           std::int64_t j_min);

inline constexpr std::int64_t kNistJMin = 500;
inline constexpr std::int64_t kExcursionsRecommendedJMin = 2000;
inline constexpr std::int64_t kVariantRecommendedJMin = 1000;

}  // namespace rngaudit::nist
