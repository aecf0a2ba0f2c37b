#include "rngaudit/tu01.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <tuple>
#include <utility>

#include "rngaudit/errors.hpp"
#include "rngaudit/numerics.hpp"

namespace rngaudit::tu01 {

// ---------------------------------------------------------------------------
// SampleCorr

namespace {

class CorrAccumulator {
 public:
  CorrAccumulator(int lag, Variant variant)
      : lag_(lag), centered_(variant == Variant::kModified), ring_(lag) {}

  void push(double x) {
    const std::size_t slot = static_cast<std::size_t>(count_ % lag_);
    if (count_ >= lag_) {
      const double prev = ring_[slot];
      sum_ += centered_ ? (prev - 0.5) * (x - 0.5) : prev * x - 0.25;
    }
    ring_[slot] = x;
    ++count_;
  }

  double statistic() const {
    const double pairs = static_cast<double>(count_ - lag_);
    const double mean = static_cast<double>(sum_) / pairs;
    const double var = (centered_ ? 1.0 / 144.0 : 1.0 / 12.0) / pairs;
    return mean / std::sqrt(var);
  }

 private:
  std::int64_t lag_;
  bool centered_;
  std::vector<double> ring_;
  std::int64_t count_ = 0;
  long double sum_ = 0.0L;
};

void check_lag(std::int64_t n, int lag) {
  if (lag < 1) throw ConfigError("sample_corr: lag must be >= 1");
  if (n <= lag) throw ConfigError("sample_corr: n must exceed the lag");
}

}  // namespace

double sample_corr_statistic(std::span<const double> reals, int lag,
                             Variant variant) {
  check_lag(static_cast<std::int64_t>(reals.size()), lag);
  CorrAccumulator acc(lag, variant);
  for (double x : reals) acc.push(x);
  return acc.statistic();
}

double sample_corr_test(std::span<const double> reals, int lag,
                        Variant variant) {
  return clamp_pvalue(
      two_sided_normal_p(sample_corr_statistic(reals, lag, variant)));
}

double sample_corr_test(BitSource& source, std::int64_t n, int lag,
                        Variant variant) {
  check_lag(n, lag);
  // With u = w / 2^32 the products are exact integers scaled by 2^-64, so
  // the sum is accumulated exactly in 128 bits.
  const bool centered = variant == Variant::kModified;
  std::vector<std::uint32_t> ring(static_cast<std::size_t>(lag));
  for (auto& w : ring) w = source.take_word();
  __int128 sum = 0;
  std::size_t slot = 0;
  for (std::int64_t i = lag; i < n; ++i) {
    const std::uint32_t w = source.take_word();
    const std::uint32_t prev = ring[slot];
    if (centered) {
      sum += static_cast<std::int64_t>(static_cast<std::int64_t>(prev) - (1ll << 31)) *
             (static_cast<std::int64_t>(w) - (1ll << 31));
    } else {
      sum += static_cast<std::uint64_t>(prev) * w;
    }
    ring[slot] = w;
    if (++slot == ring.size()) slot = 0;
  }
  const std::int64_t pairs = n - lag;
  if (!centered) sum -= static_cast<__int128>(pairs) << 62;  // the 1/4 terms
  const double mean =
      std::ldexp(static_cast<double>(sum), -64) / static_cast<double>(pairs);
  const double var = (centered ? 1.0 / 144.0 : 1.0 / 12.0) /
                     static_cast<double>(pairs);
  return clamp_pvalue(two_sided_normal_p(mean / std::sqrt(var)));
}

// ---------------------------------------------------------------------------
// sstring_Run

namespace {

void check_run_args(std::int64_t pairs, int max_length) {
  if (pairs < 1) throw ConfigError("string_run: n must be >= 1");
  if (max_length < 2) throw ConfigError("string_run: k must be >= 2");
}

}  // namespace

RunCounts count_runs(BitSource& source, std::int64_t pairs, int max_length) {
  check_run_args(pairs, max_length);
  RunCounts out;
  out.zeros.assign(static_cast<std::size_t>(max_length), 0);
  out.ones.assign(static_cast<std::size_t>(max_length), 0);
  out.pairs = pairs;
  const std::uint64_t start = source.bits_consumed();
  std::uint8_t bit = source.peek_bit();
  for (std::int64_t r = 0; r < 2 * pairs; ++r) {
    const std::uint64_t len = source.consume_run(bit);
    const auto cls = static_cast<std::size_t>(
        std::min<std::uint64_t>(len, static_cast<std::uint64_t>(max_length)) - 1);
    ++(bit ? out.ones : out.zeros)[cls];
    bit ^= 1;
  }
  out.bits = static_cast<std::int64_t>(source.bits_consumed() - start);
  return out;
}

RunCounts count_runs(std::span<const std::uint8_t> bits, std::int64_t pairs,
                     int max_length) {
  check_run_args(pairs, max_length);
  RunCounts out;
  out.zeros.assign(static_cast<std::size_t>(max_length), 0);
  out.ones.assign(static_cast<std::size_t>(max_length), 0);
  out.pairs = pairs;
  std::size_t pos = 0;
  for (std::int64_t r = 0; r < 2 * pairs; ++r) {
    if (pos >= bits.size()) {
      throw InsufficientInput("insufficient input: string_run ran out of bits "
                              "after " + std::to_string(r) + " runs");
    }
    const std::uint8_t bit = bits[pos];
    std::size_t end = pos;
    while (end < bits.size() && bits[end] == bit) ++end;
    // A run is complete only once a different bit follows it.
    if (end == bits.size()) {
      throw InsufficientInput("insufficient input: string_run ran out of bits "
                              "after " + std::to_string(r) + " runs");
    }
    const std::size_t len = end - pos;
    const auto cls = std::min<std::size_t>(len, max_length) - 1;
    ++(bit ? out.ones : out.zeros)[cls];
    pos = end;
  }
  out.bits = static_cast<std::int64_t>(pos);
  return out;
}

StringRunResult string_run_statistics(const RunCounts& counts, Variant variant) {
  const double n = static_cast<double>(counts.pairs);
  const double y = static_cast<double>(counts.bits);
  StringRunResult out{};
  out.normal_statistic = (y - 4.0 * n) / std::sqrt(
                                             (variant == Variant::kOriginal ? 8.0 : 4.0) * n);
  out.p_normal = clamp_pvalue(two_sided_normal_p(out.normal_statistic));

  // Keep k classes {1, ..., k-1, >=k}, the tail having probability 2^-(k-1),
  // with k reduced until its expected count reaches 5.
  int k = static_cast<int>(counts.zeros.size());
  while (k > 2 && n * std::ldexp(1.0, -(k - 1)) < 5.0) --k;
  double chi2 = 0.0;
  for (const auto* x : {&counts.zeros, &counts.ones}) {
    for (int i = 1; i <= k; ++i) {
      std::int64_t observed = 0;
      if (i < k) {
        observed = (*x)[static_cast<std::size_t>(i - 1)];
      } else {
        for (std::size_t j = static_cast<std::size_t>(k - 1); j < x->size(); ++j) {
          observed += (*x)[j];
        }
      }
      const double p = std::ldexp(1.0, -(i < k ? i : k - 1));
      const double expected = n * p;
      const double denom =
          variant == Variant::kOriginal ? expected * (1.0 - p) : expected;
      const double diff = static_cast<double>(observed) - expected;
      chi2 += diff * diff / denom;
    }
  }
  out.chi2 = chi2;
  out.classes = k;
  out.df = 2 * k - 2;
  out.p_chi2 = clamp_pvalue(chi2_sf(out.df, chi2));
  return out;
}

StringRunResult string_run_test(BitSource& source, std::int64_t pairs,
                                int max_length, Variant variant) {
  return string_run_statistics(count_runs(source, pairs, max_length), variant);
}

// ---------------------------------------------------------------------------
// Savir2

std::vector<double> savir2_cell_probs(std::int64_t m, int t) {
  if (m < 2) throw ConfigError("savir2: m must be >= 2");
  if (t < 1) throw ConfigError("savir2: t must be >= 1");
  static std::mutex mutex;
  static std::map<std::pair<std::int64_t, int>, std::vector<double>> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find({m, t}); it != cache.end()) return it->second;
  }
  const auto size = static_cast<std::size_t>(m);
  std::vector<double> probs(size, 1.0 / static_cast<double>(m));
  for (int s = 2; s <= t; ++s) {
    // P(I_s = k) = sum_{j >= k} P(I_{s-1} = j) / j.
    long double suffix = 0.0L;
    for (std::size_t v = size; v-- > 0;) {
      suffix += static_cast<long double>(probs[v]) / static_cast<long double>(v + 1);
      probs[v] = static_cast<double>(suffix);
    }
  }
  std::lock_guard lock(mutex);
  cache.emplace(std::make_pair(m, t), probs);
  return probs;
}

std::vector<CellGroup> merge_cells(std::span<const double> probs,
                                   std::int64_t n, double threshold) {
  if (n < 1) throw ConfigError("merge_cells: n must be >= 1");
  std::vector<CellGroup> groups;  // built from the top value downwards
  const double need = threshold / static_cast<double>(n);
  double acc = 0.0;
  std::int64_t last = static_cast<std::int64_t>(probs.size());
  for (std::int64_t v = last; v >= 1; --v) {
    acc += probs[static_cast<std::size_t>(v - 1)];
    if (acc >= need) {
      groups.push_back({v, last, acc});
      acc = 0.0;
      last = v - 1;
    }
  }
  if (last >= 1) {
    // Leftover low values that never reached the threshold.
    if (groups.empty()) {
      throw ConfigError("savir2: too few draws for any chi-square cell");
    }
    groups.back().first = 1;
    groups.back().prob += acc;
  }
  if (groups.size() < 2) {
    throw ConfigError("savir2: fewer than two cells after merging");
  }
  std::reverse(groups.begin(), groups.end());
  return groups;
}

namespace {

struct SavirTable {
  std::vector<CellGroup> groups;
  std::vector<std::int64_t> firsts;  // groups[i].first, for lookup
  std::vector<std::uint32_t> small;   // group index of values below its size

  std::size_t group_of(std::int64_t value) const {
    if (static_cast<std::uint64_t>(value) < small.size()) return small[value];
    return static_cast<std::size_t>(
        std::upper_bound(firsts.begin(), firsts.end(), value) -
        firsts.begin() - 1);
  }
};

// The merged cells depend only on the parameters; built once per process.
std::shared_ptr<const SavirTable> savir_table(const SavirParams& params) {
  using Key = std::tuple<std::int64_t, int, std::int64_t, double>;
  static std::mutex mutex;
  static std::map<Key, std::shared_ptr<const SavirTable>> cache;
  const Key key{params.m, params.t, params.n, params.merge_threshold};
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<SavirTable>();
  table->groups = merge_cells(savir2_cell_probs(params.m, params.t), params.n,
                              params.merge_threshold);
  for (const CellGroup& g : table->groups) table->firsts.push_back(g.first);
  // Draws concentrate on small values; give those a direct table.
  const std::int64_t direct = std::min<std::int64_t>(params.m, 1 << 16) + 1;
  table->small.resize(static_cast<std::size_t>(direct));
  for (std::size_t i = 0, v = 1; v < table->small.size(); ++v) {
    while (static_cast<std::int64_t>(v) > table->groups[i].last) ++i;
    table->small[v] = static_cast<std::uint32_t>(i);
  }
  std::lock_guard lock(mutex);
  return cache.emplace(key, std::move(table)).first->second;
}

double grouped_pvalue(const SavirTable& table,
                      std::span<const std::int64_t> observed) {
  std::int64_t total = 0;
  for (std::int64_t c : observed) total += c;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < table.groups.size(); ++i) {
    const double expected = static_cast<double>(total) * table.groups[i].prob;
    const double diff = static_cast<double>(observed[i]) - expected;
    chi2 += diff * diff / expected;
  }
  return clamp_pvalue(
      chi2_sf(static_cast<int>(table.groups.size()) - 1, chi2));
}

}  // namespace

double savir2_pvalue(std::span<const std::int64_t> counts,
                     const SavirParams& params) {
  if (counts.size() != static_cast<std::size_t>(params.m)) {
    throw ConfigError("savir2: counts must cover values 1..m");
  }
  const auto table = savir_table(params);
  std::vector<std::int64_t> observed(table->groups.size(), 0);
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const CellGroup& g = table->groups[i];
    for (std::int64_t v = g.first; v <= g.last; ++v) {
      observed[i] += counts[static_cast<std::size_t>(v - 1)];
    }
  }
  return grouped_pvalue(*table, observed);
}

double savir2_test(BitSource& source, const SavirParams& params) {
  if (params.n < 1) throw ConfigError("savir2: n must be >= 1");
  if (params.m < 2 || params.t < 1) {
    throw ConfigError("savir2: needs m >= 2 and t >= 1");
  }
  const auto table = savir_table(params);
  std::vector<std::int64_t> observed(table->groups.size(), 0);
  const auto m = static_cast<std::uint64_t>(params.m);
  for (std::int64_t i = 0; i < params.n; ++i) {
    // I_1 = ceil(m U_1), I_s = ceil(I_{s-1} U_s), taken as floor(.) + 1 so
    // that U = 0 still lands in 1..I_{s-1}. With U = w / 2^32 the floor is
    // exact in integers.
    auto scaled = [&source](std::uint64_t v) {
      return static_cast<std::uint64_t>(
                 (static_cast<unsigned __int128>(v) * source.take_word()) >> 32) + 1;
    };
    std::uint64_t value = scaled(m);
    for (int s = 2; s <= params.t; ++s) value = scaled(value);
    ++observed[table->group_of(static_cast<std::int64_t>(value))];
  }
  return grouped_pvalue(*table, observed);
}

}  // namespace rngaudit::tu01
