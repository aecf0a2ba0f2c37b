#pragma once

// Special functions and distribution tails shared by all tests.

#include <cstdint>
#include <string>

namespace rngaudit {

// Natural-log probability; -inf encodes zero.
struct LogProb {
  double value;
  double prob() const;
};

double erfc(double x);

// Regularized upper incomplete gamma Q(a, x).
double igamc(double a, double x);
// log Q(a, x); finite far below the double underflow threshold.
double log_igamc(double a, double x);

double chi2_sf(int df, double x);
double chi2_log_sf(int df, double x);

// P(Z > x) for standard normal Z.
double normal_sf(double x);
// Two-sided normal tail erfc(|z| / sqrt 2), and its natural log.
double two_sided_normal_p(double z);
double log_two_sided_normal_p(double z);

// log of the binomial pmf C(n, j) p^j (1-p)^(n-j), evaluated with Loader's
// saddle-point expansion so that exp() recovers the pmf to ~1e-15 relative.
LogProb binom_logpmf(std::int64_t n, double p, std::int64_t j);

// Reported p-values below this become the symbol "eps".
inline constexpr double kEpsThreshold = 1e-320;

// Clamps to [0, 1]; throws ConsistencyError on NaN.
double clamp_pvalue(double p);

// "eps" for p < kEpsThreshold, otherwise %.6g-style text.
std::string format_pvalue(double p);

}  // namespace rngaudit
