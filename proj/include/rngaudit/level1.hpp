#pragma once

// The first-level test contract: a descriptor names a test, its sample size
// and variant; running it against a bit source yields a TestOutcome.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "rngaudit/bitstream.hpp"

namespace rngaudit {

enum class Variant { kOriginal, kModified };

std::string_view to_string(Variant v);
Variant parse_variant(std::string_view text);

enum class TestId {
  kFrequency,
  kBlockFrequency,
  kCumulativeSums,
  kRuns,
  kLongestRun,
  kRank,
  kDft,
  kNonOverlappingTemplate,
  kOverlappingTemplate,
  kUniversal,
  kApproximateEntropy,
  kSerial,
  kLinearComplexity,
  kRandomExcursions,
  kRandomExcursionsVariant,
  kSampleCorr,
  kStringRun,
  kSavir2,
  // Harness calibration: one uniform01 draw reported as the p-value.
  kIdentity,
};

std::string_view to_string(TestId id);
TestId parse_test_id(std::string_view text);
// Display name as in the audited suites ("Discrete Fourier Transform", ...).
std::string_view display_name(TestId id);
bool has_variants(TestId id);
bool is_excursion_test(TestId id);
// Tests that consume uniform01 reals instead of a fixed bit block.
bool is_real_valued(TestId id);
// Tests that are a pure function of an n-bit block.
bool is_block_test(TestId id);

// Optional knobs; unset fields take per-test defaults that may depend on n.
struct TestParams {
  std::optional<int> block_length;     // block frequency M, linear complexity M
  std::optional<int> pattern_length;   // approximate entropy / serial m
  std::optional<double> dft_d;         // 4 (original) or 3.8 (modified)
  std::optional<std::int64_t> j_min;   // random excursions family
  int lag = 1;                         // sample_corr k
  int run_max_length = 30;             // string_run k
  std::int64_t savir_m = 1 << 20;
  std::optional<int> savir_t;          // 30 (original) or 9 (modified)
  double merge_threshold = 5.0;        // savir2 minimum expected cell count

  bool operator==(const TestParams&) const = default;
};

struct TestDescriptor {
  TestId id = TestId::kFrequency;
  // Bits for NIST tests; reals for sample_corr; run pairs for string_run;
  // generated values for savir2; ignored by the identity test.
  std::int64_t n = 1'000'000;
  Variant variant = Variant::kOriginal;
  TestParams params;

  int arity() const;
  // Label of each p-value index ("x=-4", "forward", template bits, ...).
  std::vector<std::string> statistic_labels() const;
  // Resolved defaults; throws ConfigError when n or params are unusable.
  TestDescriptor resolved() const;
};

struct TestOutcome {
  std::vector<double> pvalues;
  bool discarded = false;
  std::optional<std::int64_t> observed_j;  // set for the excursion family

  static TestOutcome discard(std::int64_t j) { return {{}, true, j}; }
  static TestOutcome kept(std::vector<double> p) {
    return {std::move(p), false, std::nullopt};
  }
};

// Runs one level-1 application, consuming the bits it needs from `source`.
// The descriptor must already be resolved.
TestOutcome run_level1(const TestDescriptor& desc, BitSource& source);

// Applies a bit-block test to an explicit block (NIST tests only).
TestOutcome run_standard_test(const TestDescriptor& desc,
                              std::span<const std::uint8_t> block);

}  // namespace rngaudit
