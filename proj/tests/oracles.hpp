#pragma once

// Reference data and independent oracles shared by the test suites.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle {

// Average SINRs of the ten-UE reference cell, dB.
inline const std::vector<double> kCellSinrDb{10.0,    11.7041, 12.9248, 13.8766, 14.6568,
                                             15.3180, 15.8917, 16.3984, 16.8521, 17.2628};

// Published FTGS parameters for the cell above: alpha/W, p, Rbar/W.
inline const std::vector<double> kAlphaOverW{2.9899, 3.7868, 4.3845, 4.8635, 5.2634,
                                             5.6070, 5.9084, 6.1769, 6.4191, 6.6397};
inline const std::vector<double> kAccessP{0.1490, 0.1235, 0.1099, 0.1012, 0.0951,
                                          0.0904, 0.0868, 0.0838, 0.0812, 0.0791};
inline const std::vector<double> kRbarOverW{2.5114, 3.0292, 3.4031, 3.6951, 3.9342,
                                            4.1365, 4.3117, 4.4662, 4.6043, 4.7291};

inline double db2lin(double db) { return std::pow(10.0, db / 10.0); }

/// Asymptotic Kolmogorov distribution tail P[K > x].
inline double kolmogorov_tail(double x) {
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    s += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

/// One-sample KS p-value of `x` against the CDF `F`.
template <typename Cdf>
double ks_pvalue(std::vector<double> x, Cdf&& F) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = F(x[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  const double sn = std::sqrt(n);
  return kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d);
}

/// Brute-force service time of L-bit packets: sum delta_k over events until
/// the drawn bits reach L, fresh accumulation per packet.
template <typename DeltaGen, typename BitsGen>
std::pair<double, double> service_time_mc(DeltaGen&& delta, BitsGen&& bits, double L, int packets,
                                          std::mt19937_64& rng) {
  double s = 0.0;
  double s2 = 0.0;
  for (int p = 0; p < packets; ++p) {
    double acc = 0.0;
    double d = 0.0;
    while (acc < L) {
      acc += bits(rng);
      d += delta(rng);
    }
    s += d;
    s2 += d * d;
  }
  const double m = s / packets;
  return {m, std::sqrt(std::max(0.0, s2 / packets - m * m))};
}

}  // namespace oracle
