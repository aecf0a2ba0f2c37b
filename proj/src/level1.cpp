#include "rngaudit/level1.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <string>

#include "rngaudit/errors.hpp"
#include "rngaudit/nist.hpp"
#include "rngaudit/tu01.hpp"

namespace rngaudit {

namespace {

struct TestInfo {
  TestId id;
  std::string_view key;
  std::string_view display;
};

constexpr std::array<TestInfo, 19> kTests = {{
    {TestId::kFrequency, "frequency", "Frequency"},
    {TestId::kBlockFrequency, "block_frequency", "Frequency test within a Block"},
    {TestId::kCumulativeSums, "cumulative_sums", "Cumulative Sums Test"},
    {TestId::kRuns, "runs", "Runs"},
    {TestId::kLongestRun, "longest_run", "Longest Run of Ones in a Block"},
    {TestId::kRank, "rank", "Binary Matrix Rank"},
    {TestId::kDft, "dft", "Discrete Fourier Transform"},
    {TestId::kNonOverlappingTemplate, "non_overlapping_template",
     "Non-Overlapping Template Matching"},
    {TestId::kOverlappingTemplate, "overlapping_template",
     "Overlapping Template Matching"},
    {TestId::kUniversal, "universal", "Maurer's Universal Statistical"},
    {TestId::kApproximateEntropy, "approximate_entropy", "Approximate Entropy"},
    {TestId::kSerial, "serial", "Serial"},
    {TestId::kLinearComplexity, "linear_complexity", "Linear Complexity"},
    {TestId::kRandomExcursions, "random_excursions", "Random Excursions"},
    {TestId::kRandomExcursionsVariant, "random_excursions_variant",
     "Random Excursions Variant"},
    {TestId::kSampleCorr, "sample_corr", "svaria_SampleCorr"},
    {TestId::kStringRun, "string_run", "sstring_Run"},
    {TestId::kSavir2, "savir2", "smarsa_Savir2"},
    {TestId::kIdentity, "identity", "Identity (calibration)"},
}};

const TestInfo& info(TestId id) {
  for (const TestInfo& t : kTests) {
    if (t.id == id) return t;
  }
  throw ConfigError("unknown test id");
}

int floor_log2(std::int64_t n) {
  return static_cast<int>(std::bit_width(static_cast<std::uint64_t>(n))) - 1;
}

void require_n(const TestDescriptor& d, std::int64_t minimum) {
  if (d.n < minimum) {
    throw ConfigError(std::string(to_string(d.id)) + " needs n >= " +
                      std::to_string(minimum) + ", got " + std::to_string(d.n));
  }
}

}  // namespace

std::string_view to_string(Variant v) {
  return v == Variant::kOriginal ? "original" : "modified";
}

Variant parse_variant(std::string_view text) {
  if (text == "original") return Variant::kOriginal;
  if (text == "modified") return Variant::kModified;
  throw ConfigError("unknown variant: " + std::string(text));
}

std::string_view to_string(TestId id) { return info(id).key; }

TestId parse_test_id(std::string_view text) {
  for (const TestInfo& t : kTests) {
    if (t.key == text) return t.id;
  }
  throw ConfigError("unknown test: " + std::string(text));
}

std::string_view display_name(TestId id) { return info(id).display; }

bool has_variants(TestId id) {
  switch (id) {
    case TestId::kLongestRun:
    case TestId::kDft:
    case TestId::kOverlappingTemplate:
    case TestId::kUniversal:
    case TestId::kRandomExcursions:
    case TestId::kRandomExcursionsVariant:
    case TestId::kSampleCorr:
    case TestId::kStringRun:
    case TestId::kSavir2:
      return true;
    default:
      return false;
  }
}

bool is_excursion_test(TestId id) {
  return id == TestId::kRandomExcursions ||
         id == TestId::kRandomExcursionsVariant;
}

bool is_real_valued(TestId id) {
  return id == TestId::kSampleCorr || id == TestId::kSavir2 ||
         id == TestId::kIdentity;
}

bool is_block_test(TestId id) {
  return !is_real_valued(id) && id != TestId::kStringRun;
}

int TestDescriptor::arity() const {
  switch (id) {
    case TestId::kCumulativeSums:
    case TestId::kSerial:
    case TestId::kStringRun:
      return 2;
    case TestId::kNonOverlappingTemplate:
      return nist::kNonOverlappingTemplateCount;
    case TestId::kRandomExcursions:
      return static_cast<int>(nist::kExcursionStates.size());
    case TestId::kRandomExcursionsVariant:
      return static_cast<int>(nist::kVariantStates.size());
    default:
      return 1;
  }
}

std::vector<std::string> TestDescriptor::statistic_labels() const {
  switch (id) {
    case TestId::kCumulativeSums:
      return {"forward", "backward"};
    case TestId::kSerial:
      return {"del1", "del2"};
    case TestId::kStringRun:
      return {"normal", "chi2"};
    case TestId::kNonOverlappingTemplate: {
      std::vector<std::string> out;
      for (std::uint32_t t : nist::aperiodic_templates(9)) {
        std::string bits;
        for (int b = 8; b >= 0; --b) bits.push_back((t >> b) & 1 ? '1' : '0');
        out.push_back(bits);
      }
      return out;
    }
    case TestId::kRandomExcursions: {
      std::vector<std::string> out;
      for (int x : nist::kExcursionStates) out.push_back("x=" + std::to_string(x));
      return out;
    }
    case TestId::kRandomExcursionsVariant: {
      std::vector<std::string> out;
      for (int x : nist::kVariantStates) out.push_back("x=" + std::to_string(x));
      return out;
    }
    default:
      return {"p"};
  }
}

TestDescriptor TestDescriptor::resolved() const {
  TestDescriptor d = *this;
  if (d.n < 1) throw ConfigError("n must be >= 1");
  if (d.params.j_min && !is_excursion_test(d.id)) {
    throw ConfigError("J_min only applies to the random excursions tests");
  }
  const bool modified = d.variant == Variant::kModified;
  switch (d.id) {
    case TestId::kFrequency:
    case TestId::kCumulativeSums:
    case TestId::kRuns:
      break;
    case TestId::kBlockFrequency:
      if (!d.params.block_length) d.params.block_length = 128;
      if (*d.params.block_length < 1) throw ConfigError("block length must be >= 1");
      require_n(d, *d.params.block_length);
      break;
    case TestId::kLongestRun:
      require_n(d, 128);
      break;
    case TestId::kRank:
      require_n(d, 38 * 1024);
      break;
    case TestId::kDft:
      if (!d.params.dft_d) {
        d.params.dft_d = modified ? nist::kDftModifiedD : nist::kDftOriginalD;
      }
      if (!(*d.params.dft_d > 0.0)) throw ConfigError("DFT d must be > 0");
      require_n(d, 2);
      if (d.n % 2 != 0) throw ConfigError("DFT test needs an even n");
      break;
    case TestId::kNonOverlappingTemplate:
      require_n(d, 8 * 9);
      break;
    case TestId::kOverlappingTemplate:
      require_n(d, 1032);
      break;
    case TestId::kUniversal:
      require_n(d, 387840);
      break;
    case TestId::kApproximateEntropy:
      if (!d.params.pattern_length) {
        d.params.pattern_length = std::min(10, floor_log2(d.n) - 6);
      }
      if (*d.params.pattern_length < 1) {
        throw ConfigError("approximate entropy needs m >= 1 (n too small?)");
      }
      require_n(d, *d.params.pattern_length + 1);
      break;
    case TestId::kSerial:
      if (!d.params.pattern_length) {
        d.params.pattern_length = std::min(16, floor_log2(d.n) - 3);
      }
      if (*d.params.pattern_length < 2) {
        throw ConfigError("serial needs m >= 2 (n too small?)");
      }
      require_n(d, *d.params.pattern_length);
      break;
    case TestId::kLinearComplexity:
      if (!d.params.block_length) d.params.block_length = 500;
      if (*d.params.block_length < 2) throw ConfigError("block length must be >= 2");
      require_n(d, *d.params.block_length);
      break;
    case TestId::kRandomExcursions:
      if (!d.params.j_min) {
        d.params.j_min =
            modified ? nist::kExcursionsRecommendedJMin : nist::kNistJMin;
      }
      if (*d.params.j_min < 1) throw ConfigError("J_min must be >= 1");
      break;
    case TestId::kRandomExcursionsVariant:
      if (!d.params.j_min) {
        d.params.j_min = modified ? nist::kVariantRecommendedJMin : nist::kNistJMin;
      }
      if (*d.params.j_min < 1) throw ConfigError("J_min must be >= 1");
      break;
    case TestId::kSampleCorr:
      if (d.params.lag < 1) throw ConfigError("lag must be >= 1");
      require_n(d, d.params.lag + 1);
      break;
    case TestId::kStringRun:
      if (d.params.run_max_length < 2) throw ConfigError("string_run k must be >= 2");
      break;
    case TestId::kSavir2:
      if (!d.params.savir_t) d.params.savir_t = modified ? 9 : 30;
      if (*d.params.savir_t < 1) throw ConfigError("savir2 t must be >= 1");
      if (d.params.savir_m < 2) throw ConfigError("savir2 m must be >= 2");
      if (!(d.params.merge_threshold > 0.0)) {
        throw ConfigError("merge threshold must be > 0");
      }
      break;
    case TestId::kIdentity:
      break;
  }
  return d;
}

TestOutcome run_standard_test(const TestDescriptor& desc,
                              std::span<const std::uint8_t> block) {
  if (!is_block_test(desc.id)) {
    throw ConfigError(std::string(to_string(desc.id)) + " is not a bit-block test");
  }
  if (static_cast<std::int64_t>(block.size()) != desc.n) {
    throw ConfigError("block length " + std::to_string(block.size()) +
                      " does not match n = " + std::to_string(desc.n));
  }
  const TestParams& p = desc.params;
  const Variant v = desc.variant;
  TestOutcome out;
  switch (desc.id) {
    case TestId::kFrequency:
      out.pvalues = {nist::frequency_test(block)};
      break;
    case TestId::kBlockFrequency:
      out.pvalues = {nist::block_frequency_test(block, p.block_length.value_or(128))};
      break;
    case TestId::kCumulativeSums: {
      const auto ps = nist::cumulative_sums_test(block);
      out.pvalues = {ps[0], ps[1]};
      break;
    }
    case TestId::kRuns:
      out.pvalues = {nist::runs_test(block)};
      break;
    case TestId::kLongestRun:
      out.pvalues = {nist::longest_run_test(block, v)};
      break;
    case TestId::kRank:
      out.pvalues = {nist::rank_test(block)};
      break;
    case TestId::kDft: {
      const double d = p.dft_d.value_or(v == Variant::kOriginal
                                            ? nist::kDftOriginalD
                                            : nist::kDftModifiedD);
      out.pvalues = {nist::dft_test(block, d)};
      break;
    }
    case TestId::kNonOverlappingTemplate:
      out.pvalues = nist::non_overlapping_template_test(block, 9);
      break;
    case TestId::kOverlappingTemplate:
      out.pvalues = {nist::overlapping_template_test(block, v)};
      break;
    case TestId::kUniversal:
      out.pvalues = {nist::universal_test(block, v)};
      break;
    case TestId::kApproximateEntropy:
      out.pvalues = {nist::approximate_entropy_test(block, p.pattern_length.value_or(10))};
      break;
    case TestId::kSerial: {
      const auto ps = nist::serial_test(block, p.pattern_length.value_or(16));
      out.pvalues = {ps[0], ps[1]};
      break;
    }
    case TestId::kLinearComplexity:
      out.pvalues = {nist::linear_complexity_test(block, p.block_length.value_or(500))};
      break;
    case TestId::kRandomExcursions:
      return nist::random_excursions_test(nist::walk_summary(block),
                                          p.j_min.value_or(nist::kNistJMin));
    case TestId::kRandomExcursionsVariant:
      return nist::random_excursions_variant_test(
          nist::walk_summary(block), p.j_min.value_or(nist::kNistJMin));
    default:
      throw ConfigError("not a bit-block test");
  }
  return out;
}

TestOutcome run_level1(const TestDescriptor& desc, BitSource& source) {
  const TestParams& p = desc.params;
  switch (desc.id) {
    case TestId::kSampleCorr:
      return TestOutcome::kept(
          {tu01::sample_corr_test(source, desc.n, p.lag, desc.variant)});
    case TestId::kStringRun: {
      const tu01::StringRunResult r =
          tu01::string_run_test(source, desc.n, p.run_max_length, desc.variant);
      return TestOutcome::kept({r.p_normal, r.p_chi2});
    }
    case TestId::kSavir2: {
      tu01::SavirParams sp;
      sp.m = p.savir_m;
      sp.t = p.savir_t.value_or(desc.variant == Variant::kOriginal ? 30 : 9);
      sp.n = desc.n;
      sp.merge_threshold = p.merge_threshold;
      return TestOutcome::kept({tu01::savir2_test(source, sp)});
    }
    case TestId::kIdentity:
      return TestOutcome::kept({source.uniform01()});
    default: {
      const BitBlock block = source.take_bits(static_cast<std::size_t>(desc.n));
      return run_standard_test(desc, block);
    }
  }
}

}  // namespace rngaudit
