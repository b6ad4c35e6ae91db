#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include "ltesched/expint.hpp"
#include "ltesched/linkadapt.hpp"
#include "oracles.hpp"

using namespace ltesched;

TEST(SnrGap, ReferenceTarget) {
  EXPECT_NEAR(snr_gap(5e-5).gamma, 5.53, 0.01);
  EXPECT_NEAR(snr_gap(5e-5).gamma, -std::log(2.5e-4) / 1.5, 1e-12);
}

TEST(SnrGap, RejectsOutOfRange) {
  EXPECT_THROW(snr_gap(0.0), ConfigError);
  EXPECT_THROW(snr_gap(0.2), ConfigError);
  EXPECT_THROW(snr_gap(-1e-3), ConfigError);
  EXPECT_THROW(snr_gap(0.1), ConfigError);  // gap below 1
  EXPECT_NO_THROW(snr_gap(0.04));
}

TEST(SpectralEfficiency, ShannonAndGap) {
  EXPECT_DOUBLE_EQ(spectral_efficiency(1.0, shannon_gap()), 1.0);
  EXPECT_DOUBLE_EQ(spectral_efficiency(0.0, snr_gap(5e-5)), 0.0);
  const auto g = snr_gap(1e-6);
  EXPECT_NEAR(spectral_efficiency(3.0 * g.gamma, g), 2.0, 1e-12);
  EXPECT_THROW(spectral_efficiency(-1.0, g), ConfigError);
}

TEST(Expint, AgainstBoostSpecialFunction) {
  for (double x : {1e-8, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.001, 2.0, 5.0, 10.0, 40.0, 300.0}) {
    const double ref = boost::math::expint(1, x);
    EXPECT_NEAR(expint_e1(x), ref, 1e-13 * ref) << "x=" << x;
  }
}

TEST(Expint, AgainstQuadratureOfDefinition) {
  boost::math::quadrature::exp_sinh<double> q;
  for (double x : {0.01, 0.3, 1.0, 2.5, 7.0, 20.0}) {
    // e^x E1(x) = int_0^inf e^{-u} / (x + u) du
    const double ref = q.integrate([x](double u) { return std::exp(-u) / (x + u); });
    EXPECT_NEAR(expint_e1_scaled(x), ref, 1e-10 * ref) << "x=" << x;
  }
}

TEST(Expint, ScaledLargeArgumentAsymptotic) {
  const double x = 1e6;
  EXPECT_NEAR(expint_e1_scaled(x), (1.0 - 1.0 / x + 2.0 / (x * x)) / x, 1e-18);
}

TEST(RayleighMeanEfficiency, MatchesMonteCarlo) {
  // Also settles the sign of the exponential-integral argument.
  const auto g = snr_gap(5e-5);
  std::mt19937_64 rng(7);
  std::exponential_distribution<double> ex(1.0);
  for (double gb_db : {0.0, 10.0, 17.2628}) {
    const double gb = oracle::db2lin(gb_db);
    double acc = 0.0;
    const int n = 2'000'000;
    for (int i = 0; i < n; ++i) acc += std::log2(1.0 + ex(rng) * gb / g.gamma);
    const double mc = acc / n;
    EXPECT_NEAR(rayleigh_mean_efficiency(gb, g), mc, 0.002 * mc) << gb_db;
  }
}

TEST(RayleighMeanEfficiency, HighSnrLimit) {
  // E[log2(eps x)] = log2(x) - euler_gamma log2(e) for large x
  const auto g = snr_gap(5e-5);
  const double gb = 1e6 * g.gamma;
  const double lim = std::log2(1e6) - 0.5772156649015329 * std::numbers::log2e;
  EXPECT_NEAR(rayleigh_mean_efficiency(gb, g), lim, 0.01 * lim);
}

TEST(Cqi, ThresholdsAndBoundaries) {
  const auto t = CqiTable::standard();
  EXPECT_EQ(cqi_from_efficiency(0.0), 0);
  EXPECT_EQ(cqi_from_efficiency(0.15), 0);
  EXPECT_EQ(cqi_from_efficiency(0.1500001), 1);
  EXPECT_EQ(cqi_from_efficiency(5.55), 14);
  EXPECT_EQ(cqi_from_efficiency(5.56), 15);
  EXPECT_EQ(cqi_from_efficiency(100.0), 15);
  EXPECT_DOUBLE_EQ(t.efficiency(0), 0.0);
  EXPECT_DOUBLE_EQ(t.efficiency(1), 0.15);
  EXPECT_DOUBLE_EQ(t.efficiency(15), 5.55);
  EXPECT_THROW(t.efficiency(16), ConfigError);
  EXPECT_THROW(cqi_from_efficiency(-0.1), ConfigError);
}

TEST(Cqi, QuantizedNeverExceedsContinuousAndIsMonotone) {
  const auto t = CqiTable::standard();
  double prev = -1.0;
  for (double eta = 0.0; eta < 8.0; eta += 0.0137) {
    const double q = t.efficiency(cqi_from_efficiency(eta, t));
    EXPECT_LE(q, eta);
    EXPECT_GE(q, prev);
    prev = q;
  }
  for (int c = 1; c < kCqiLevels; ++c) EXPECT_GT(t.efficiency(c), t.efficiency(c - 1));
}

TEST(Cqi, RateFromCqi) {
  EXPECT_DOUBLE_EQ(rate_from_cqi(0, 4e5, 1e-3), 0.0);
  EXPECT_NEAR(rate_from_cqi(15, 4e5, 1e-3), 5.55 * 400.0, 1e-9);
}

TEST(Cqi, LoadTable) {
  std::istringstream in("# custom\n0.1 0.2 0.3 0.4\n0.5 0.6 0.7 0.8 0.9 1.0 1.1 1.2 1.3 1.4 1.5 inf\n");
  const auto t = load_cqi_table(in);
  EXPECT_DOUBLE_EQ(t.thresholds[0], 0.1);
  EXPECT_TRUE(std::isinf(t.thresholds[15]));
  std::istringstream shortin("0.1 0.2");
  EXPECT_THROW(load_cqi_table(shortin), ConfigError);
  std::istringstream bad("0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9 1.0 1.1 1.2 1.3 1.4 1.5 x");
  EXPECT_THROW(load_cqi_table(bad), ConfigError);
  std::istringstream nonmono("0.1 0.2 0.3 0.25 0.5 0.6 0.7 0.8 0.9 1.0 1.1 1.2 1.3 1.4 1.5 inf");
  EXPECT_THROW(load_cqi_table(nonmono), ConfigError);
}
