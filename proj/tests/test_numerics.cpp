#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "rngaudit/errors.hpp"
#include "rngaudit/numerics.hpp"

namespace rngaudit {
namespace {

// Maclaurin series of erf in long double; erfc = 1 - erf.
long double erfc_series(long double x) {
  long double term = x;  // (-1)^k x^(2k+1) / k!
  long double sum = 0.0L;
  for (int k = 0; k < 60; ++k) {
    sum += term / (2 * k + 1);
    term *= -x * x / (k + 1);
  }
  return 1.0L - 2.0L / std::sqrt(std::numbers::pi_v<long double>) * sum;
}

// Q(a, x) = 1 - (1/Gamma(a)) int_0^x t^(a-1) e^-t dt by adaptive quadrature.
double igamc_quadrature(double a, double x) {
  auto f = [a](double t) {
    return std::exp((a - 1.0) * std::log(t) - t - std::lgamma(a));
  };
  const double lower =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, x, 15, 1e-15);
  return 1.0 - lower;
}

TEST(Erfc, SeriesOracle) {
  EXPECT_EQ(erfc(0.0), 1.0);
  const double oracle = static_cast<double>(erfc_series(1.0L));
  EXPECT_NEAR(oracle, 0.1572992070, 1e-10);
  EXPECT_LE(std::abs(erfc(1.0) - oracle) / oracle, 1e-12);
  for (double x : {0.1, 0.5, 2.0, 3.0}) {
    const double o = static_cast<double>(erfc_series(x));
    EXPECT_LE(std::abs(erfc(x) - o) / o, 1e-11) << x;
  }
}

TEST(Erfc, Symmetry) {
  for (double x : {0.5, 1.0, 3.0}) EXPECT_NEAR(erfc(-x) + erfc(x), 2.0, 1e-15);
  EXPECT_THROW(erfc(std::nan("")), DomainError);
}

TEST(Igamc, Identities) {
  for (double a : {0.5, 8.0, 50.0}) EXPECT_EQ(igamc(a, 0.0), 1.0);
  for (double x : {0.25, 1.0, 4.0}) {
    EXPECT_NEAR(igamc(0.5, x), erfc(std::sqrt(x)), 1e-14);
  }
  EXPECT_THROW(igamc(0.0, 1.0), DomainError);
  EXPECT_THROW(igamc(1.0, -1.0), DomainError);
}

TEST(Igamc, QuadratureOracle) {
  const double oracle = igamc_quadrature(8.0, 16.0);
  EXPECT_LE(std::abs(igamc(8.0, 16.0) - oracle) / oracle, 1e-10);
  for (auto [a, x] : {std::pair{2.5, 1.0}, {2.5, 9.0}, {30.0, 25.0}, {3.0, 0.5}}) {
    const double o = igamc_quadrature(a, x);
    EXPECT_LE(std::abs(igamc(a, x) - o) / o, 1e-9) << a << " " << x;
  }
}

TEST(Igamc, LogTailFarBeyondUnderflow) {
  // Q(a, x) ~ x^(a-1) e^-x / Gamma(a) for x >> a.
  const double a = 2.0, x = 2000.0;
  const double asymptotic = (a - 1.0) * std::log(x) - x - std::lgamma(a) +
                            std::log1p((a - 1.0) / x);
  EXPECT_NEAR(log_igamc(a, x), asymptotic, 1e-5);
  EXPECT_EQ(igamc(a, x), 0.0);
  EXPECT_NEAR(log_igamc(3.0, 2.0), std::log(igamc(3.0, 2.0)), 1e-13);
}

TEST(Chi2, Values) {
  EXPECT_EQ(chi2_sf(16, 0.0), 1.0);
  const double oracle = igamc_quadrature(8.0, 16.0);
  EXPECT_NEAR(chi2_sf(16, 32.0), oracle, 1e-8);
  EXPECT_NEAR(chi2_sf(16, 32.0), 0.01, 1e-3);
  for (double x : {1.0, 5.0}) EXPECT_NEAR(chi2_sf(2, x), std::exp(-x / 2), 1e-15);
  for (double z : {0.3, 1.0, 2.5}) {
    EXPECT_NEAR(chi2_sf(1, z * z), 2.0 * normal_sf(z), 1e-14);
  }
  double prev = 1.0;
  for (double x = 0.5; x < 100.0; x += 0.5) {
    const double p = chi2_sf(9, x);
    EXPECT_LE(p, prev);
    prev = p;
  }
  EXPECT_NEAR(chi2_log_sf(16, 32.0), std::log(chi2_sf(16, 32.0)), 1e-12);
}

TEST(Normal, Values) {
  EXPECT_EQ(normal_sf(0.0), 0.5);
  for (double x : {0.2, 1.0, 4.0}) EXPECT_NEAR(normal_sf(x) + normal_sf(-x), 1.0, 1e-15);
  // Quadrature of the density from 0 to x.
  const double x = 1.6448536269514722;
  auto density = [](double t) {
    return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
  };
  const double oracle =
      0.5 - boost::math::quadrature::gauss_kronrod<double, 61>::integrate(density, 0.0, x);
  EXPECT_NEAR(oracle, 0.05, 1e-9);
  EXPECT_NEAR(normal_sf(x), oracle, 1e-9);
  EXPECT_NEAR(two_sided_normal_p(-1.96), 2.0 * normal_sf(1.96), 1e-15);
  // log erfc(x) ~ -x^2 - log(x sqrt(pi)) + log(1 - 1/(2x^2) + 3/(4x^4)).
  const double u = 50.0 / std::sqrt(2.0);
  const double asymptotic = -u * u - std::log(u * std::sqrt(std::numbers::pi)) +
                            std::log1p(-0.5 / (u * u) + 0.75 / (u * u * u * u));
  EXPECT_NEAR(log_two_sided_normal_p(50.0), asymptotic, 1e-8);
  EXPECT_THROW(normal_sf(std::nan("")), DomainError);
}

TEST(Binomial, Normalization) {
  double total = 0.0;
  std::int64_t argmax = -1;
  double best = -1.0;
  for (std::int64_t j = 0; j <= 1000; ++j) {
    const double p = binom_logpmf(1000, 0.99, j).prob();
    total += p;
    if (p > best) {
      best = p;
      argmax = j;
    }
  }
  EXPECT_NEAR(total, 1.0, 1e-10);
  EXPECT_EQ(argmax, 990);
}

TEST(Binomial, MatchesLgamma) {
  EXPECT_NEAR(binom_logpmf(2, 0.5, 1).value, std::log(0.5), 1e-15);
  for (auto [n, p, j] : {std::tuple{1000, 0.99, 990}, {1000, 0.99, 950},
                         {10, 0.5, 3}, {100, 0.3, 0}, {100, 0.3, 100}}) {
    const double direct = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                          std::lgamma(n - j + 1.0) + j * std::log(p) +
                          (n - j) * std::log1p(-p);
    EXPECT_NEAR(binom_logpmf(n, p, j).value, direct, 1e-9 * std::max(1.0, std::abs(direct)));
  }
  EXPECT_THROW(binom_logpmf(10, 1.5, 1), DomainError);
  EXPECT_THROW(binom_logpmf(10, 0.5, 11), DomainError);
}

TEST(Pvalue, ClampAndFormat) {
  EXPECT_EQ(clamp_pvalue(1.0000001), 1.0);
  EXPECT_EQ(clamp_pvalue(-1e-18), 0.0);
  EXPECT_THROW(clamp_pvalue(std::nan("")), ConsistencyError);
  EXPECT_EQ(format_pvalue(0.0), "eps");
  EXPECT_EQ(format_pvalue(1e-321), "eps");
  EXPECT_EQ(format_pvalue(0.5), "0.5");
  EXPECT_EQ(format_pvalue(2.7e-49), "2.7E-49");
}

}  // namespace
}  // namespace rngaudit
