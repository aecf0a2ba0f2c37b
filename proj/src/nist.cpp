#include "rngaudit/nist.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "rngaudit/errors.hpp"
#include "rngaudit/numerics.hpp"

namespace rngaudit::nist {

namespace {

void require_bits(Bits bits, std::size_t minimum, const char* test) {
  if (bits.size() < minimum) {
    throw InsufficientInput(std::string("insufficient input: ") + test +
                            " needs at least " + std::to_string(minimum) +
                            " bits, got " + std::to_string(bits.size()));
  }
}

double phi(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double chi_square(std::span<const std::int64_t> observed,
                  std::span<const double> probs, double total) {
  double chi2 = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double expected = total * probs[i];
    const double diff = static_cast<double>(observed[i]) - expected;
    chi2 += diff * diff / expected;
  }
  return chi2;
}

// count / 2^bits as a double, without overflowing the intermediate.
double ratio_to_power_of_two(const BigInt& count, int bits) {
  if (count == 0) return 0.0;
  const int msb = static_cast<int>(boost::multiprecision::msb(count));
  const int shift = std::max(0, msb - 100);
  const BigInt top = count >> shift;
  return std::ldexp(top.convert_to<double>(), shift - bits);
}

double round_to_15_decimals(double p) { return std::round(p * 1e15) / 1e15; }

}  // namespace

// ---------------------------------------------------------------------------

double frequency_test(Bits bits) {
  require_bits(bits, 1, "frequency");
  std::int64_t ones = 0;
  for (std::uint8_t b : bits) ones += b;
  const auto n = static_cast<std::int64_t>(bits.size());
  const double s_obs =
      std::fabs(static_cast<double>(2 * ones - n)) / std::sqrt(double(n));
  return clamp_pvalue(std::erfc(s_obs / std::numbers::sqrt2));
}

double block_frequency_test(Bits bits, int block_length) {
  if (block_length < 1) throw ConfigError("block frequency: M must be >= 1");
  require_bits(bits, static_cast<std::size_t>(block_length), "block frequency");
  const std::size_t blocks = bits.size() / block_length;
  double sum = 0.0;
  for (std::size_t i = 0; i < blocks; ++i) {
    std::int64_t ones = 0;
    for (int j = 0; j < block_length; ++j) ones += bits[i * block_length + j];
    const double v = static_cast<double>(ones) / block_length - 0.5;
    sum += v * v;
  }
  const double chi2 = 4.0 * block_length * sum;
  return clamp_pvalue(igamc(blocks / 2.0, chi2 / 2.0));
}

// Mirrors cusum.c, including its truncating integer divisions in the
// summation bounds.
double cumulative_sums_pvalue(std::int64_t n, std::int64_t z) {
  if (n < 1 || z < 1) throw ConfigError("cumulative sums: n, z must be >= 1");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  double sum1 = 0.0;
  for (std::int64_t k = (-n / z + 1) / 4; k <= (n / z - 1) / 4; ++k) {
    sum1 += phi(static_cast<double>((4 * k + 1) * z) / sqrt_n);
    sum1 -= phi(static_cast<double>((4 * k - 1) * z) / sqrt_n);
  }
  double sum2 = 0.0;
  for (std::int64_t k = (-n / z - 3) / 4; k <= (n / z - 1) / 4; ++k) {
    sum2 += phi(static_cast<double>((4 * k + 3) * z) / sqrt_n);
    sum2 -= phi(static_cast<double>((4 * k + 1) * z) / sqrt_n);
  }
  return clamp_pvalue(1.0 - sum1 + sum2);
}

std::array<double, 2> cumulative_sums_test(Bits bits) {
  require_bits(bits, 1, "cumulative sums");
  const auto n = static_cast<std::int64_t>(bits.size());
  auto max_excursion = [&](auto begin, auto end) {
    std::int64_t s = 0, hi = 0, lo = 0;
    for (auto it = begin; it != end; ++it) {
      s += 2 * static_cast<std::int64_t>(*it) - 1;
      hi = std::max(hi, s);
      lo = std::min(lo, s);
    }
    return std::max(hi, -lo);
  };
  const std::int64_t forward = max_excursion(bits.begin(), bits.end());
  const std::int64_t backward = max_excursion(bits.rbegin(), bits.rend());
  return {cumulative_sums_pvalue(n, forward),
          cumulative_sums_pvalue(n, backward)};
}

double runs_test(Bits bits) {
  require_bits(bits, 1, "runs");
  const double n = static_cast<double>(bits.size());
  std::int64_t ones = 0;
  for (std::uint8_t b : bits) ones += b;
  const double pi = ones / n;
  // Frequency prerequisite of runs.c.
  if (std::fabs(pi - 0.5) > 2.0 / std::sqrt(n)) return 0.0;
  std::int64_t v_obs = 1;
  for (std::size_t k = 1; k < bits.size(); ++k) v_obs += bits[k] != bits[k - 1];
  const double num = std::fabs(v_obs - 2.0 * n * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * n) * pi * (1.0 - pi);
  return clamp_pvalue(std::erfc(num / den));
}

// ---------------------------------------------------------------------------
// Longest run of ones.

LongestRunLayout longest_run_layout(std::int64_t n) {
  if (n < 128) {
    throw InsufficientInput(
        "insufficient input: longest run needs at least 128 bits, got " +
        std::to_string(n));
  }
  // Constants of longestRunOfOnes.c; the M = 10^4 row is rounded to four
  // decimals there.
  if (n < 6272) return {8, 1, 4, {0.21484375, 0.3671875, 0.23046875, 0.1875}};
  if (n < 750000) {
    return {128,
            4,
            9,
            {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071,
             0.112398847}};
  }
  return {10000,
          10,
          16,
          {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727}};
}

namespace {

// Number of block_bits-bit strings whose longest 1-run is <= limit. Uses
// f(k) = sum_{i=0}^{limit} f(k-1-i), f(-1) = 1, f(<-1) = 0, split on the
// position of the first zero.
BigInt strings_with_runs_at_most(int block_bits, int limit) {
  if (limit < 0) return 0;
  // f[k + 1] holds f(k).
  std::vector<BigInt> f(static_cast<std::size_t>(block_bits) + 2);
  f[0] = 1;
  BigInt window = 1;  // f(k-1) + ... + f(k-1-limit)
  for (int k = 0; k <= block_bits; ++k) {
    f[k + 1] = window;
    window += f[k + 1];
    const int drop = k - limit;  // index (k - limit - 1) + 1
    if (drop >= 0) window -= f[drop];
  }
  return f[block_bits + 1];
}

}  // namespace

std::vector<BigInt> longest_run_class_counts(int block_bits, int lowest,
                                             int highest) {
  if (block_bits < 1 || lowest < 0 || highest <= lowest) {
    throw ConfigError("longest run classes need M >= 1, 0 <= lo < hi");
  }
  std::vector<BigInt> counts;
  BigInt previous = strings_with_runs_at_most(block_bits, lowest);
  counts.push_back(previous);
  for (int v = lowest + 1; v < highest; ++v) {
    BigInt current = strings_with_runs_at_most(block_bits, v);
    counts.push_back(current - previous);
    previous = std::move(current);
  }
  counts.push_back((BigInt(1) << block_bits) - previous);
  return counts;
}

std::vector<double> longest_run_class_probs(int block_bits, int lowest,
                                            int highest) {
  static std::mutex mutex;
  static std::map<std::array<int, 3>, std::vector<double>> cache;
  const std::array<int, 3> key = {block_bits, lowest, highest};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  std::vector<double> probs;
  for (const BigInt& c : longest_run_class_counts(block_bits, lowest, highest)) {
    probs.push_back(round_to_15_decimals(ratio_to_power_of_two(c, block_bits)));
  }
  std::lock_guard lock(mutex);
  cache.emplace(key, probs);
  return probs;
}

double longest_run_test(Bits bits, Variant variant) {
  const LongestRunLayout layout =
      longest_run_layout(static_cast<std::int64_t>(bits.size()));
  const std::vector<double> probs =
      variant == Variant::kOriginal
          ? layout.legacy_probs
          : longest_run_class_probs(layout.block_bits, layout.lowest,
                                    layout.highest);
  const std::size_t blocks = bits.size() / layout.block_bits;
  std::vector<std::int64_t> nu(probs.size(), 0);
  for (std::size_t i = 0; i < blocks; ++i) {
    int run = 0, longest = 0;
    for (int j = 0; j < layout.block_bits; ++j) {
      run = bits[i * layout.block_bits + j] ? run + 1 : 0;
      longest = std::max(longest, run);
    }
    const int cls = std::clamp(longest, layout.lowest, layout.highest) -
                    layout.lowest;
    ++nu[static_cast<std::size_t>(cls)];
  }
  const double chi2 = chi_square(nu, probs, static_cast<double>(blocks));
  const double k = static_cast<double>(probs.size() - 1);
  return clamp_pvalue(igamc(k / 2.0, chi2 / 2.0));
}

// ---------------------------------------------------------------------------
// Binary matrix rank.

int gf2_rank(std::span<std::uint32_t> rows) {
  int rank = 0;
  for (int col = 31; col >= 0 && rank < static_cast<int>(rows.size()); --col) {
    const std::uint32_t mask = 1u << col;
    std::size_t pivot = rank;
    while (pivot < rows.size() && !(rows[pivot] & mask)) ++pivot;
    if (pivot == rows.size()) continue;
    std::swap(rows[rank], rows[pivot]);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (r != static_cast<std::size_t>(rank) && (rows[r] & mask)) {
        rows[r] ^= rows[rank];
      }
    }
    ++rank;
  }
  return rank;
}

double rank_test(Bits bits) {
  constexpr int kSide = 32;
  constexpr std::size_t kMatrixBits = kSide * kSide;
  require_bits(bits, 38 * kMatrixBits, "binary matrix rank");
  const std::size_t matrices = bits.size() / kMatrixBits;
  // Full-rank and rank-deficient-by-one probabilities as in rank.c.
  auto rank_prob = [](int r) {
    double product = 1.0;
    for (int i = 0; i <= r - 1; ++i) {
      product *= ((1.0 - std::pow(2.0, i - kSide)) *
                  (1.0 - std::pow(2.0, i - kSide))) /
                 (1.0 - std::pow(2.0, i - r));
    }
    return std::pow(2.0, r * (kSide + kSide - r) - kSide * kSide) * product;
  };
  const double p32 = rank_prob(32);
  const double p31 = rank_prob(31);
  const double p30 = 1.0 - (p32 + p31);
  std::int64_t f32 = 0, f31 = 0;
  std::array<std::uint32_t, kSide> rows{};
  for (std::size_t k = 0; k < matrices; ++k) {
    const std::uint8_t* base = bits.data() + k * kMatrixBits;
    for (int i = 0; i < kSide; ++i) {
      std::uint32_t row = 0;
      for (int j = 0; j < kSide; ++j) row = (row << 1) | base[i * kSide + j];
      rows[i] = row;
    }
    const int r = gf2_rank(rows);
    if (r == 32) ++f32;
    if (r == 31) ++f31;
  }
  const std::array<std::int64_t, 3> observed = {
      f32, f31, static_cast<std::int64_t>(matrices) - f32 - f31};
  const std::array<double, 3> probs = {p32, p31, p30};
  const double chi2 = chi_square(observed, probs, static_cast<double>(matrices));
  return clamp_pvalue(std::exp(-chi2 / 2.0));
}

// ---------------------------------------------------------------------------
// Discrete Fourier transform.

namespace {

struct FftwBuffer {
  double* in;
  fftw_complex* out;
  explicit FftwBuffer(std::size_t n)
      : in(fftw_alloc_real(n)), out(fftw_alloc_complex(n / 2 + 1)) {}
  ~FftwBuffer() {
    fftw_free(in);
    fftw_free(out);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;
};

// Plans are created once per length; executing a plan on fresh aligned
// buffers is thread-safe in FFTW, planning is not.
fftw_plan real_plan(int n) {
  static std::mutex mutex;
  static std::map<int, fftw_plan> plans;
  std::lock_guard lock(mutex);
  if (auto it = plans.find(n); it != plans.end()) return it->second;
  FftwBuffer scratch(static_cast<std::size_t>(n));
  fftw_plan plan =
      fftw_plan_dft_r2c_1d(n, scratch.in, scratch.out, FFTW_ESTIMATE);
  plans.emplace(n, plan);
  return plan;
}

}  // namespace

std::vector<double> dft_moduli(Bits bits) {
  if (bits.size() < 2 || bits.size() % 2 != 0) {
    throw ConfigError("DFT test needs an even n >= 2, got " +
                      std::to_string(bits.size()));
  }
  const int n = static_cast<int>(bits.size());
  fftw_plan plan = real_plan(n);
  // Fresh large buffers per call cost more in page faults than the transform.
  thread_local std::unique_ptr<FftwBuffer> cached;
  thread_local int cached_n = 0;
  if (!cached || cached_n != n) {
    cached = std::make_unique<FftwBuffer>(bits.size());
    cached_n = n;
  }
  FftwBuffer& buf = *cached;
  for (int k = 0; k < n; ++k) buf.in[k] = 2.0 * bits[k] - 1.0;
  fftw_execute_dft_r2c(plan, buf.in, buf.out);
  std::vector<double> moduli(bits.size() / 2);
  for (std::size_t i = 0; i < moduli.size(); ++i) {
    const double re = buf.out[i][0], im = buf.out[i][1];
    moduli[i] = std::sqrt(re * re + im * im);
  }
  return moduli;
}

DftResult dft_statistic(Bits bits, double d) {
  if (!(d > 0.0)) throw ConfigError("DFT test: d must be > 0");
  const std::vector<double> moduli = dft_moduli(bits);
  const double n = static_cast<double>(bits.size());
  // sqrt(n ln(1/0.05)); the audited code writes ln 20 as 2.995732274.
  const double threshold = std::sqrt(2.995732274 * n);
  std::int64_t below = 0;
  for (double m : moduli) below += m < threshold;
  const double expected = 0.95 * n / 2.0;
  const double statistic =
      (static_cast<double>(below) - expected) / std::sqrt(0.05 * 0.95 * n / d);
  return {below, threshold, statistic,
          clamp_pvalue(two_sided_normal_p(statistic))};
}

double dft_test(Bits bits, double d) { return dft_statistic(bits, d).pvalue; }

// ---------------------------------------------------------------------------
// Template matching.

std::vector<std::uint32_t> aperiodic_templates(int m) {
  if (m < 1 || m > 16) throw ConfigError("template length must be in [1, 16]");
  std::vector<std::uint32_t> out;
  for (std::uint32_t v = 0; v < (1u << m); ++v) {
    bool bordered = false;
    // A border of length b: the first b bits equal the last b bits.
    for (int b = 1; b < m && !bordered; ++b) {
      const std::uint32_t prefix = v >> (m - b);
      const std::uint32_t suffix = v & ((1u << b) - 1);
      bordered = prefix == suffix;
    }
    if (!bordered) out.push_back(v);
  }
  return out;
}

std::vector<double> non_overlapping_template_test(Bits bits, int m) {
  constexpr int kBlocks = 8;
  if (m < 2 || m > 16) throw ConfigError("template length must be in [2, 16]");
  require_bits(bits, static_cast<std::size_t>(kBlocks) * m,
               "non-overlapping template");
  const std::vector<std::uint32_t> templates = aperiodic_templates(m);
  const std::size_t block = bits.size() / kBlocks;
  const double mu = static_cast<double>(block - m + 1) / std::ldexp(1.0, m);
  const double var = static_cast<double>(block) *
                     (1.0 / std::ldexp(1.0, m) -
                      (2.0 * m - 1.0) / std::ldexp(1.0, 2 * m));
  // A border-free template cannot overlap itself, so the skip-ahead count of
  // the reference code equals the number of matching windows.
  const std::uint32_t mask = (1u << m) - 1;
  std::vector<std::vector<std::int64_t>> hist(
      kBlocks, std::vector<std::int64_t>(std::size_t{1} << m, 0));
  for (int i = 0; i < kBlocks; ++i) {
    const std::uint8_t* base = bits.data() + i * block;
    std::uint32_t w = 0;
    for (int k = 0; k < m - 1; ++k) w = (w << 1) | base[k];
    for (std::size_t j = m - 1; j < block; ++j) {
      w = ((w << 1) | base[j]) & mask;
      ++hist[i][w];
    }
  }
  std::vector<double> pvalues;
  pvalues.reserve(templates.size());
  for (std::uint32_t t : templates) {
    double chi2 = 0.0;
    for (int i = 0; i < kBlocks; ++i) {
      const double diff = static_cast<double>(hist[i][t]) - mu;
      chi2 += diff * diff / var;
    }
    pvalues.push_back(clamp_pvalue(igamc(kBlocks / 2.0, chi2 / 2.0)));
  }
  return pvalues;
}

std::vector<BigInt> overlap_occurrence_counts(int m, int window_bits,
                                              int classes) {
  if (m < 1 || window_bits < 1 || classes < 1) {
    throw ConfigError("overlap counts need m, M, K >= 1");
  }
  // State: (trailing ones capped at m - 1, occurrences capped at classes).
  const int runs = m;
  const int occ = classes + 1;
  auto idx = [&](int r, int c) { return static_cast<std::size_t>(r * occ + c); };
  std::vector<BigInt> cur(static_cast<std::size_t>(runs * occ));
  std::vector<BigInt> next(cur.size());
  cur[idx(0, 0)] = 1;
  for (int step = 0; step < window_bits; ++step) {
    for (auto& v : next) v = 0;
    for (int r = 0; r < runs; ++r) {
      for (int c = 0; c < occ; ++c) {
        const BigInt& v = cur[idx(r, c)];
        if (v == 0) continue;
        next[idx(0, c)] += v;  // a zero resets the run
        if (r + 1 >= m) {
          next[idx(m - 1, std::min(c + 1, classes))] += v;
        } else {
          next[idx(r + 1, c)] += v;
        }
      }
    }
    std::swap(cur, next);
  }
  std::vector<BigInt> counts(static_cast<std::size_t>(occ));
  for (int r = 0; r < runs; ++r) {
    for (int c = 0; c < occ; ++c) counts[c] += cur[idx(r, c)];
  }
  return counts;
}

std::vector<double> overlap_occurrence_probs(int m, int window_bits,
                                             int classes) {
  std::vector<double> probs;
  for (const BigInt& c : overlap_occurrence_counts(m, window_bits, classes)) {
    probs.push_back(ratio_to_power_of_two(c, window_bits));
  }
  return probs;
}

std::vector<double> overlap_legacy_probs(int m, int window_bits, int classes) {
  const double lambda =
      static_cast<double>(window_bits - m + 1) / std::ldexp(1.0, m);
  const double eta = lambda / 2.0;
  // Pr(u, eta) of overlappingTemplateMatchings.c.
  auto pr = [&](int u) {
    if (u == 0) return std::exp(-eta);
    double sum = 0.0;
    for (int l = 1; l <= u; ++l) {
      sum += std::exp(-eta - u * std::log(2.0) + l * std::log(eta) -
                      std::lgamma(l + 1.0) + std::lgamma(double(u)) -
                      std::lgamma(double(l)) - std::lgamma(u - l + 1.0));
    }
    return sum;
  };
  std::vector<double> probs;
  double sum = 0.0;
  for (int u = 0; u < classes; ++u) {
    probs.push_back(pr(u));
    sum += probs.back();
  }
  probs.push_back(1.0 - sum);
  return probs;
}

double overlapping_template_test(Bits bits, Variant variant) {
  constexpr int kM = 9;
  constexpr int kWindow = 1032;
  constexpr int kClasses = 5;
  require_bits(bits, kWindow, "overlapping template");
  static const std::vector<double> exact =
      overlap_occurrence_probs(kM, kWindow, kClasses);
  static const std::vector<double> legacy =
      overlap_legacy_probs(kM, kWindow, kClasses);
  const std::vector<double>& probs =
      variant == Variant::kOriginal ? legacy : exact;
  const std::size_t blocks = bits.size() / kWindow;
  std::vector<std::int64_t> nu(kClasses + 1, 0);
  for (std::size_t i = 0; i < blocks; ++i) {
    const std::uint8_t* base = bits.data() + i * kWindow;
    std::int64_t occurrences = 0;
    int run = 0;
    for (int j = 0; j < kWindow; ++j) {
      run = base[j] ? run + 1 : 0;
      if (run >= kM) ++occurrences;
    }
    ++nu[static_cast<std::size_t>(std::min<std::int64_t>(occurrences, kClasses))];
  }
  const double chi2 = chi_square(nu, probs, static_cast<double>(blocks));
  return clamp_pvalue(igamc(kClasses / 2.0, chi2 / 2.0));
}

// ---------------------------------------------------------------------------
// Maurer's universal test.

UniversalLayout universal_layout(std::int64_t n) {
  static constexpr std::array<std::int64_t, 11> kThresholds = {
      387840,   904960,    2068480,   4654080,   10342400,  22753280,
      49643520, 107560960, 231669760, 496435200, 1059061760};
  int L = 5;
  for (std::size_t i = 0; i < kThresholds.size(); ++i) {
    if (n >= kThresholds[i]) L = 6 + static_cast<int>(i);
  }
  if (L < 6) {
    throw InsufficientInput(
        "insufficient input: universal needs at least 387840 bits, got " +
        std::to_string(n));
  }
  const std::int64_t q = 10 * (std::int64_t{1} << L);
  return {L, q, n / L - q};
}

namespace {

constexpr std::size_t kHarmonicTable = 4096;

// H_m = sum_{k=1}^{m} 1/k.
double harmonic(std::int64_t m) {
  static const auto table = [] {
    std::vector<double> t(kHarmonicTable);
    long double h = 0.0L;
    for (std::size_t k = 0; k < kHarmonicTable; ++k) {
      if (k > 0) h += 1.0L / static_cast<long double>(k);
      t[k] = static_cast<double>(h);
    }
    return t;
  }();
  if (m < static_cast<std::int64_t>(kHarmonicTable)) {
    return table[static_cast<std::size_t>(m)];
  }
  const double x = static_cast<double>(m);
  const double x2 = x * x;
  return std::log(x) + std::numbers::egamma + 1.0 / (2.0 * x) -
         1.0 / (12.0 * x2) + 1.0 / (120.0 * x2 * x2) -
         1.0 / (252.0 * x2 * x2 * x2);
}

// Number of geometric terms after which (1 - p)^i < 1e-17.
std::int64_t series_length(double p) {
  return static_cast<std::int64_t>(std::ceil(-40.0 / std::log1p(-p))) + 16;
}

struct ScoreMoments {
  double mean;
  double variance;
};

ScoreMoments score_moments(int L, GapScore score) {
  const double p = std::ldexp(1.0, -L);
  const std::int64_t terms = series_length(p);
  long double m1 = 0.0L, m2 = 0.0L;
  double w = p;
  for (std::int64_t i = 1; i <= terms; ++i) {
    const double s = gap_score(score, i);
    m1 += static_cast<long double>(w) * s;
    m2 += static_cast<long double>(w) * s * s;
    w *= 1.0 - p;
  }
  return {static_cast<double>(m1), static_cast<double>(m2 - m1 * m1)};
}

}  // namespace

double gap_score(GapScore score, std::int64_t gap) {
  if (gap < 1) throw DomainError("gap must be >= 1");
  if (score == GapScore::kLog2) return std::log2(static_cast<double>(gap));
  return harmonic(gap - 1) / std::numbers::ln2;
}

double universal_expectation(int L, GapScore score) {
  if (L < 1 || L > 24) throw ConfigError("universal: L must be in [1, 24]");
  return score_moments(L, score).mean;
}

double universal_score_variance(int L, GapScore score) {
  if (L < 1 || L > 24) throw ConfigError("universal: L must be in [1, 24]");
  return score_moments(L, score).variance;
}

// Gaps A_n and A_{n+k} of an i.i.d. uniform block sequence (p = 2^-L) are
// dependent only when block n+k differs from block n and does not occur in
// between; that has probability (1-p)^k and then A_{n+k} = k + D where D is
// the distance back from n to the previous occurrence of block n+k. With
// r = (1-2p)/(1-p), conditionally on D = d:
//   E[s(A) | D = d] = sum_{a<d} (p/(1-p)) r^(a-1) s(a)
//                     + r^(d-1) sum_{j>=1} p (1-p)^(j-1) s(d+j)
// and Cov(s(A_n), s(A_{n+k})) = (1-p)^k sum_d P(D=d) s(k+d) (E[s(A)|D=d] - mu).
double universal_statistic_variance(int L, std::int64_t K, GapScore score) {
  if (L < 1 || L > 24) throw ConfigError("universal: L must be in [1, 24]");
  if (K < 1) throw ConfigError("universal: K must be >= 1");
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<double>> cache;
  static std::map<std::tuple<int, std::int64_t, int>, double> results;
  const auto key = std::make_pair(L, static_cast<int>(score));
  const auto result_key = std::make_tuple(L, K, static_cast<int>(score));
  {
    std::lock_guard lock(mutex);
    if (auto it = results.find(result_key); it != results.end()) {
      return it->second;
    }
  }

  const double p = std::ldexp(1.0, -L);
  const std::int64_t terms = series_length(p);
  std::vector<double> weighted_h;  // P(D=d) h(d), d = 1..terms
  ScoreMoments moments{};
  {
    std::lock_guard lock(mutex);
    auto it = cache.find(key);
    if (it == cache.end()) {
      moments = score_moments(L, score);
      const double q = p / (1.0 - p);
      const double r = 1.0 - q;
      // tail[d] = sum_{j>=1} p (1-p)^(j-1) s(d+j), built backwards from a
      // start computed by the direct series.
      const std::int64_t top = terms;
      std::vector<double> tail(static_cast<std::size_t>(top) + 1);
      {
        long double acc = 0.0L;
        double w = p;
        for (std::int64_t j = 1; j <= terms; ++j) {
          acc += static_cast<long double>(w) * gap_score(score, top + j);
          w *= 1.0 - p;
        }
        tail[top] = static_cast<double>(acc);
      }
      for (std::int64_t d = top - 1; d >= 1; --d) {
        tail[d] = p * gap_score(score, d + 1) + (1.0 - p) * tail[d + 1];
      }
      std::vector<double> values(static_cast<std::size_t>(top) + 1, 0.0);
      long double prefix = 0.0L;
      double r_pow = 1.0;  // r^(d-1)
      double pd = p;       // P(D = d)
      for (std::int64_t d = 1; d <= top; ++d) {
        const double h = static_cast<double>(prefix) + r_pow * tail[d] -
                         moments.mean;
        values[d] = pd * h;
        prefix += static_cast<long double>(q) * r_pow * gap_score(score, d);
        r_pow *= r;
        pd *= 1.0 - p;
      }
      values[0] = moments.variance;
      it = cache.emplace(key, std::move(values)).first;
    }
    weighted_h = it->second;
  }
  const double var = weighted_h[0];
  // Cov_k for k = 1.. until (1-p)^k is negligible.
  long double cov_sum = 0.0L;
  double decay = 1.0;
  const std::int64_t lags = std::min<std::int64_t>(K - 1, terms);
  std::vector<double> scores(static_cast<std::size_t>(lags + terms) + 2);
  for (std::size_t i = 1; i < scores.size(); ++i) {
    scores[i] = gap_score(score, static_cast<std::int64_t>(i));
  }
  for (std::int64_t k = 1; k <= lags; ++k) {
    decay *= 1.0 - p;
    double inner = 0.0;
    for (std::int64_t d = 1; d <= terms; ++d) {
      inner += weighted_h[d] * scores[k + d];
    }
    cov_sum += static_cast<long double>(K - k) * decay * inner;
  }
  const double kd = static_cast<double>(K);
  const double result =
      (kd * var + 2.0 * static_cast<double>(cov_sum)) / (kd * kd);
  std::lock_guard lock(mutex);
  results.emplace(result_key, result);
  return result;
}

double universal_legacy_expectation(int L) {
  static constexpr std::array<double, 17> kExpected = {
      0,         0.73264948, 1.5374383, 2.40160681, 3.31122472, 4.25342659,
      5.2177052, 6.1962507,  7.1836656, 8.1764248,  9.1723243,  10.170032,
      11.168765, 12.168070,  13.167693, 14.167488,  15.167379};
  if (L < 1 || L > 16) throw ConfigError("universal: L must be in [1, 16]");
  return kExpected[static_cast<std::size_t>(L)];
}

double universal_legacy_variance(int L) {
  static constexpr std::array<double, 17> kVariance = {
      0,     0.690, 1.338, 1.901, 2.358, 2.705, 2.954, 3.125, 3.238,
      3.311, 3.356, 3.384, 3.401, 3.410, 3.416, 3.419, 3.421};
  if (L < 1 || L > 16) throw ConfigError("universal: L must be in [1, 16]");
  return kVariance[static_cast<std::size_t>(L)];
}

UniversalResult universal_statistic(Bits bits, Variant variant) {
  const UniversalLayout layout =
      universal_layout(static_cast<std::int64_t>(bits.size()));
  const int L = layout.L;
  const GapScore score =
      variant == Variant::kOriginal ? GapScore::kLog2 : GapScore::kCoron;
  std::vector<std::int64_t> last(std::size_t{1} << L, 0);
  auto block_value = [&](std::int64_t i) {
    std::uint32_t v = 0;
    const std::uint8_t* base = bits.data() + (i - 1) * L;
    for (int j = 0; j < L; ++j) v = (v << 1) | base[j];
    return v;
  };
  for (std::int64_t i = 1; i <= layout.Q; ++i) last[block_value(i)] = i;
  long double sum = 0.0L;
  for (std::int64_t i = layout.Q + 1; i <= layout.Q + layout.K; ++i) {
    const std::uint32_t v = block_value(i);
    sum += gap_score(score, i - last[v]);
    last[v] = i;
  }
  UniversalResult out{};
  out.statistic = static_cast<double>(sum / layout.K);
  const double k = static_cast<double>(layout.K);
  if (variant == Variant::kOriginal) {
    const double c =
        0.7 - 0.8 / L + (4.0 + 32.0 / L) * std::pow(k, -3.0 / L) / 15.0;
    out.expectation = universal_legacy_expectation(L);
    out.sigma = c * std::sqrt(universal_legacy_variance(L) / k);
  } else {
    out.expectation = universal_expectation(L, score);
    out.sigma = std::sqrt(universal_statistic_variance(L, layout.K, score));
  }
  out.pvalue = clamp_pvalue(std::erfc(std::fabs(out.statistic - out.expectation) /
                                      (std::numbers::sqrt2 * out.sigma)));
  return out;
}

double universal_test(Bits bits, Variant variant) {
  return universal_statistic(bits, variant).pvalue;
}

// ---------------------------------------------------------------------------
// Entropy and serial tests.

namespace {

// Counts of every b-bit pattern over the n cyclic windows of the sequence.
std::vector<std::int64_t> cyclic_pattern_counts(Bits bits, int b) {
  std::vector<std::int64_t> counts(std::size_t{1} << b, 0);
  const std::size_t n = bits.size();
  const std::uint32_t mask = (b == 32) ? ~0u : ((1u << b) - 1);
  std::uint32_t w = 0;
  for (int k = 0; k < b - 1; ++k) w = (w << 1) | bits[k % n];
  // Window i ends at bit i + b - 1, which wraps once i + b - 1 >= n.
  const std::size_t straight = n >= static_cast<std::size_t>(b - 1) ? n - (b - 1) : 0;
  for (std::size_t i = 0; i < straight; ++i) {
    w = ((w << 1) | bits[i + b - 1]) & mask;
    ++counts[w];
  }
  for (std::size_t i = straight; i < n; ++i) {
    w = ((w << 1) | bits[(i + b - 1) % n]) & mask;
    ++counts[w];
  }
  return counts;
}

double psi_squared(Bits bits, int m) {
  if (m <= 0) return 0.0;
  const std::vector<std::int64_t> counts = cyclic_pattern_counts(bits, m);
  const double n = static_cast<double>(bits.size());
  double sum = 0.0;
  for (std::int64_t c : counts) sum += static_cast<double>(c) * c;
  return sum * std::ldexp(1.0, m) / n - n;
}

}  // namespace

double approximate_entropy_test(Bits bits, int m) {
  if (m < 1 || m > 24) throw ConfigError("approximate entropy: m in [1, 24]");
  require_bits(bits, static_cast<std::size_t>(m) + 1, "approximate entropy");
  const double n = static_cast<double>(bits.size());
  double ap_en[2];
  for (int r = 0; r < 2; ++r) {
    double sum = 0.0;
    for (std::int64_t c : cyclic_pattern_counts(bits, m + r)) {
      if (c > 0) sum += c * std::log(c / n);
    }
    ap_en[r] = sum / n;
  }
  const double apen = ap_en[0] - ap_en[1];
  const double chi2 = 2.0 * n * (std::log(2.0) - apen);
  return clamp_pvalue(igamc(std::ldexp(1.0, m - 1), chi2 / 2.0));
}

std::array<double, 2> serial_test(Bits bits, int m) {
  if (m < 2 || m > 24) throw ConfigError("serial: m in [2, 24]");
  require_bits(bits, static_cast<std::size_t>(m), "serial");
  const double psim0 = psi_squared(bits, m);
  const double psim1 = psi_squared(bits, m - 1);
  const double psim2 = psi_squared(bits, m - 2);
  const double del1 = psim0 - psim1;
  const double del2 = psim0 - 2.0 * psim1 + psim2;
  return {clamp_pvalue(igamc(std::ldexp(1.0, m - 2), del1 / 2.0)),
          clamp_pvalue(igamc(std::ldexp(1.0, m - 3), del2 / 2.0))};
}

// ---------------------------------------------------------------------------
// Linear complexity.

int berlekamp_massey(Bits bits) {
  const std::size_t n = bits.size();
  const std::size_t words = n / 64 + 2;
  // rev bit k holds s_{n-1-k}; the window (bit j = s_{i-j}) at step i starts
  // at bit offset n-1-i of rev.
  std::vector<std::uint64_t> rev(words + 1, 0);
  for (std::size_t k = 0; k < n; ++k) {
    rev[k / 64] |= std::uint64_t{bits[n - 1 - k]} << (k % 64);
  }
  auto window_word = [&](std::size_t offset) {
    const std::size_t w = offset / 64;
    const unsigned b = offset % 64;
    if (b == 0) return rev[w];
    return (rev[w] >> b) | (rev[w + 1] << (64 - b));
  };
  std::vector<std::uint64_t> c(words, 0), b(words, 0), t(words, 0);
  c[0] = 1;
  b[0] = 1;
  std::size_t len = 0;
  std::int64_t last = -1;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t offset = n - 1 - i;
    const std::size_t used = len / 64 + 1;
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < used; ++w) {
      // Window bits beyond position i are s_{<0}: mask them off.
      std::uint64_t win = window_word(offset + 64 * w);
      const std::size_t valid = i + 1 > 64 * w ? i + 1 - 64 * w : 0;
      if (valid < 64) win &= valid == 0 ? 0 : (~std::uint64_t{0} >> (64 - valid));
      acc ^= c[w] & win;
    }
    if (!(std::popcount(acc) & 1)) continue;
    const std::size_t shift = i - static_cast<std::size_t>(last);
    const std::size_t word_shift = shift / 64;
    const unsigned bit_shift = shift % 64;
    const bool grow = 2 * len <= i;
    const std::size_t new_len = grow ? i + 1 - len : len;
    const std::size_t top = std::min(words, new_len / 64 + 1);
    if (grow) std::copy(c.begin(), c.begin() + top, t.begin());
    for (std::size_t w = word_shift; w < top; ++w) {
      std::uint64_t v = b[w - word_shift] << bit_shift;
      if (bit_shift != 0 && w > word_shift) {
        v |= b[w - word_shift - 1] >> (64 - bit_shift);
      }
      c[w] ^= v;
    }
    if (grow) {
      len = new_len;
      last = static_cast<std::int64_t>(i);
      std::copy(t.begin(), t.begin() + top, b.begin());
      std::fill(b.begin() + top, b.end(), 0);
    }
  }
  return static_cast<int>(len);
}

double linear_complexity_test(Bits bits, int block_length) {
  if (block_length < 2) throw ConfigError("linear complexity: M must be >= 2");
  require_bits(bits, static_cast<std::size_t>(block_length), "linear complexity");
  // linearComplexity.c ships pi[0] = 0.01047 (the rev. 1a text has 0.010417).
  static constexpr std::array<double, 7> kPi = {
      0.01047, 0.03125, 0.12500, 0.50000, 0.25000, 0.06250, 0.020833};
  const int big_m = block_length;
  const std::size_t blocks = bits.size() / big_m;
  const double mean_sign = ((big_m + 1) % 2 == 0) ? 1.0 : -1.0;
  const double mean = big_m / 2.0 + (9.0 + mean_sign) / 36.0 -
                      1.0 / std::ldexp(1.0, big_m) * (big_m / 3.0 + 2.0 / 9.0);
  const double t_sign = (big_m % 2 == 0) ? 1.0 : -1.0;
  std::array<std::int64_t, 7> nu{};
  for (std::size_t i = 0; i < blocks; ++i) {
    const int l = berlekamp_massey(bits.subspan(i * big_m, big_m));
    const double t = t_sign * (l - mean) + 2.0 / 9.0;
    int cls;
    if (t <= -2.5) cls = 0;
    else if (t <= -1.5) cls = 1;
    else if (t <= -0.5) cls = 2;
    else if (t <= 0.5) cls = 3;
    else if (t <= 1.5) cls = 4;
    else if (t <= 2.5) cls = 5;
    else cls = 6;
    ++nu[cls];
  }
  const double chi2 = chi_square(nu, kPi, static_cast<double>(blocks));
  return clamp_pvalue(igamc(3.0, chi2 / 2.0));
}

// ---------------------------------------------------------------------------
// Random excursions.

std::int64_t WalkSummary::visit_count(int x, int k) const {
  for (std::size_t s = 0; s < kExcursionStates.size(); ++s) {
    if (kExcursionStates[s] == x) return visits[s].at(static_cast<std::size_t>(k));
  }
  throw ConfigError("excursion state must be in +-1..+-4");
}

std::int64_t WalkSummary::total_visit_count(int x) const {
  for (std::size_t s = 0; s < kVariantStates.size(); ++s) {
    if (kVariantStates[s] == x) return total_visits[s];
  }
  throw ConfigError("variant state must be in +-1..+-9");
}

WalkSummary walk_summary(Bits bits) {
  WalkSummary summary;
  std::array<int, 9> in_cycle{};  // visits to s = -4..4 in the current cycle
  auto close_cycle = [&] {
    ++summary.cycles;
    for (std::size_t s = 0; s < kExcursionStates.size(); ++s) {
      const int count = in_cycle[kExcursionStates[s] + 4];
      ++summary.visits[s][static_cast<std::size_t>(std::min(count, 5))];
    }
    in_cycle.fill(0);
  };
  std::array<std::int64_t, 19> totals{};  // s = -9..9
  std::int64_t state = 0;
  for (std::uint8_t bit : bits) {
    state += bit ? 1 : -1;
    if (state == 0) {
      close_cycle();
    } else {
      if (state >= -4 && state <= 4) ++in_cycle[state + 4];
      if (state >= -9 && state <= 9) ++totals[state + 9];
    }
  }
  // The padded final zero closes the last cycle (which is just "0, 0" when
  // the walk already ended at zero).
  close_cycle();
  for (std::size_t s = 0; s < kVariantStates.size(); ++s) {
    summary.total_visits[s] = totals[kVariantStates[s] + 9];
  }
  return summary;
}

double excursion_pi(int x, int k) {
  const int a = std::abs(x);
  if (a < 1 || k < 0 || k > 5) {
    throw ConfigError("excursion_pi needs x != 0 and k in 0..5");
  }
  const double stay = 1.0 - 1.0 / (2.0 * a);
  if (k == 0) return stay;
  if (k == 5) return 1.0 / (2.0 * a) * std::pow(stay, 4);
  return 1.0 / (4.0 * a * a) * std::pow(stay, k - 1);
}

TestOutcome random_excursions_test(const WalkSummary& summary,
                                   std::int64_t j_min) {
  if (j_min < 1) throw ConfigError("J_min must be >= 1");
  const std::int64_t j = summary.cycles;
  if (j < j_min) return TestOutcome::discard(j);
  TestOutcome out;
  out.observed_j = j;
  for (std::size_t s = 0; s < kExcursionStates.size(); ++s) {
    double chi2 = 0.0;
    for (int k = 0; k <= 5; ++k) {
      const double expected = j * excursion_pi(kExcursionStates[s], k);
      const double diff = summary.visits[s][k] - expected;
      chi2 += diff * diff / expected;
    }
    out.pvalues.push_back(clamp_pvalue(igamc(2.5, chi2 / 2.0)));
  }
  return out;
}

TestOutcome random_excursions_variant_test(const WalkSummary& summary,
                                           std::int64_t j_min) {
  if (j_min < 1) throw ConfigError("J_min must be >= 1");
  const std::int64_t j = summary.cycles;
  if (j < j_min) return TestOutcome::discard(j);
  TestOutcome out;
  out.observed_j = j;
  for (std::size_t s = 0; s < kVariantStates.size(); ++s) {
    const int x = kVariantStates[s];
    const double z = static_cast<double>(summary.total_visits[s] - j) /
                     std::sqrt(static_cast<double>(j) * (4.0 * std::abs(x) - 2.0));
    out.pvalues.push_back(clamp_pvalue(two_sided_normal_p(z)));
  }
  return out;
}

}  // namespace rngaudit::nist
