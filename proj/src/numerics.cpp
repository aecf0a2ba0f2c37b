#include "rngaudit/numerics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "rngaudit/errors.hpp"

namespace rngaudit {

namespace {

constexpr int kMaxIterations = 1'000'000;
constexpr double kTiny = 1e-300;

void require_finite_or_inf(double x, const char* what) {
  if (std::isnan(x)) throw DomainError(std::string(what) + ": NaN argument");
}

void check_gamma_domain(double a, double x) {
  if (std::isnan(a) || std::isnan(x)) throw DomainError("igamc: NaN argument");
  if (!(a > 0.0)) throw DomainError("igamc: a must be > 0");
  if (x < 0.0) throw DomainError("igamc: x must be >= 0");
}

// Lower regularized P(a, x) by its power series; valid for x < a + 1.
double gamma_series(double a, double x, double log_prefactor) {
  double term = 1.0 / a;
  double sum = term;
  double ap = a;
  for (int n = 0; n < kMaxIterations; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-17) break;
  }
  return sum * std::exp(log_prefactor);
}

// log of the continued fraction for Q(a, x) without its prefactor; valid for
// x >= a + 1 (modified Lentz).
double log_gamma_cf(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIterations; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  return std::log(h);
}

// Loader's Stirling-formula remainder: log(n!) - log(sqrt(2 pi n) (n/e)^n).
double stirlerr(double n) {
  constexpr double kS0 = 1.0 / 12.0;
  constexpr double kS1 = 1.0 / 360.0;
  constexpr double kS2 = 1.0 / 1260.0;
  constexpr double kS3 = 1.0 / 1680.0;
  constexpr double kS4 = 1.0 / 1188.0;
  if (n <= 15.0) {
    static const auto table = [] {
      std::array<double, 16> t{};
      const long double half_log_2pi =
          0.5L * std::log(2.0L * std::numbers::pi_v<long double>);
      t[0] = 0.0;  // unused: lgamma(1) - log(0) is not finite
      for (int i = 1; i <= 15; ++i) {
        const long double k = i;
        t[i] = static_cast<double>(std::lgamma(k + 1.0L) -
                                   (k + 0.5L) * std::log(k) + k - half_log_2pi);
      }
      return t;
    }();
    return table[static_cast<std::size_t>(n)];
  }
  const double nn = n * n;
  if (n > 500) return (kS0 - kS1 / nn) / n;
  if (n > 80) return (kS0 - (kS1 - kS2 / nn) / nn) / n;
  if (n > 35) return (kS0 - (kS1 - (kS2 - kS3 / nn) / nn) / nn) / n;
  return (kS0 - (kS1 - (kS2 - (kS3 - kS4 / nn) / nn) / nn) / nn) / n;
}

// Deviance term x log(x / np) + np - x, accurate when x ~ np.
double bd0(double x, double np) {
  if (std::fabs(x - np) < 0.1 * (x + np)) {
    double v = (x - np) / (x + np);
    double s = (x - np) * v;
    double ej = 2 * x * v;
    v = v * v;
    for (int j = 1; j < 1000; ++j) {
      ej *= v;
      const double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
    return s;
  }
  return x * std::log(x / np) + np - x;
}

// log erfc(t) for large t via the Laplace continued fraction.
double log_erfc_large(double t) {
  double k = t;
  for (int i = 60; i >= 1; --i) k = t + (0.5 * i) / k;
  return -t * t - std::log(k) - 0.5 * std::log(std::numbers::pi);
}

}  // namespace

double LogProb::prob() const { return std::exp(value); }

double erfc(double x) {
  require_finite_or_inf(x, "erfc");
  return std::erfc(x);
}

double log_igamc(double a, double x) {
  check_gamma_domain(a, x);
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return -std::numeric_limits<double>::infinity();
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    return std::log1p(-gamma_series(a, x, log_prefactor));
  }
  return log_prefactor + log_gamma_cf(a, x);
}

double igamc(double a, double x) {
  check_gamma_domain(a, x);
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  const double log_prefactor = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    const double p = gamma_series(a, x, log_prefactor);
    return std::clamp(1.0 - p, 0.0, 1.0);
  }
  return std::clamp(std::exp(log_prefactor + log_gamma_cf(a, x)), 0.0, 1.0);
}

double chi2_sf(int df, double x) {
  if (df < 1) throw DomainError("chi2_sf: df must be >= 1");
  return igamc(0.5 * df, 0.5 * x);
}

double chi2_log_sf(int df, double x) {
  if (df < 1) throw DomainError("chi2_log_sf: df must be >= 1");
  return log_igamc(0.5 * df, 0.5 * x);
}

double normal_sf(double x) {
  require_finite_or_inf(x, "normal_sf");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

double two_sided_normal_p(double z) {
  require_finite_or_inf(z, "two_sided_normal_p");
  return std::min(1.0, std::erfc(std::fabs(z) / std::numbers::sqrt2));
}

double log_two_sided_normal_p(double z) {
  require_finite_or_inf(z, "log_two_sided_normal_p");
  const double t = std::fabs(z) / std::numbers::sqrt2;
  if (t < 20.0) return std::log(std::min(1.0, std::erfc(t)));
  return log_erfc_large(t);
}

LogProb binom_logpmf(std::int64_t n, double p, std::int64_t j) {
  if (n < 1) throw DomainError("binom_logpmf: N must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("binom_logpmf: p must be in (0,1)");
  if (j < 0 || j > n) throw DomainError("binom_logpmf: j must be in [0, N]");
  const double q = 1.0 - p;
  const double nd = static_cast<double>(n);
  const double x = static_cast<double>(j);
  if (j == 0) {
    return {p < 0.1 ? -bd0(nd, nd * q) - nd * p : nd * std::log1p(-p)};
  }
  if (j == n) {
    return {q < 0.1 ? -bd0(nd, nd * p) - nd * q : nd * std::log(p)};
  }
  const double lc = stirlerr(nd) - stirlerr(x) - stirlerr(nd - x) -
                    bd0(x, nd * p) - bd0(nd - x, nd * q);
  const double lf =
      std::log(2 * std::numbers::pi) + std::log(x) + std::log1p(-x / nd);
  return {lc - 0.5 * lf};
}

double clamp_pvalue(double p) {
  if (std::isnan(p)) throw ConsistencyError("p-value is NaN");
  return std::clamp(p, 0.0, 1.0);
}

std::string format_pvalue(double p) {
  if (p < kEpsThreshold) return "eps";
  char buf[32];
  if (p >= 1e-3) {
    std::snprintf(buf, sizeof(buf), "%.3g", p);
  } else {
    std::snprintf(buf, sizeof(buf), "%.1E", p);
  }
  return buf;
}

}  // namespace rngaudit
