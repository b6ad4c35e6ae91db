#pragma once

// Link adaptation: SINR -> spectral efficiency (SNR-gap model), CQI
// quantization and achievable per-RBG rate.

#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "error.hpp"
#include "expint.hpp"

namespace ltesched {

struct SnrGap {
  double gamma = 1.0;       // linear
  double target_ber = 0.0;  // 0 when the gap was set directly
};

/// Gap between Shannon capacity and an M-QAM system at the given BER:
/// gamma = -ln(5 ber) / 1.5. Rejects BERs for which gamma < 1.
inline SnrGap snr_gap(double target_ber) {
  detail::require(target_ber > 0.0 && target_ber < 0.2,
                  "target BER must lie in (0, 0.2), got " + std::to_string(target_ber));
  const double g = -std::log(5.0 * target_ber) / 1.5;
  detail::require(g >= 1.0, "target BER " + std::to_string(target_ber) +
                                " yields an SNR gap below 1");
  return {g, target_ber};
}

/// Shannon bound (gamma = 1).
inline SnrGap shannon_gap() { return {1.0, 0.0}; }

inline double spectral_efficiency(double sinr, const SnrGap& gap) {
  detail::require(sinr >= 0.0, "SINR must be non-negative");
  return std::log2(1.0 + sinr / gap.gamma);
}

/// Mean spectral efficiency under Rayleigh fading with average SINR
/// gamma_bar: E[log2(1 + eps gamma_bar / Gamma)], eps ~ Exp(1), which equals
/// log2(e) e^{Gamma/gamma_bar} E1(Gamma/gamma_bar).
inline double rayleigh_mean_efficiency(double gamma_bar, const SnrGap& gap) {
  detail::require(gamma_bar > 0.0, "average SINR must be positive");
  return std::numbers::log2e * expint_e1_scaled(gap.gamma / gamma_bar);
}

using Cqi = int;
inline constexpr int kCqiLevels = 16;

/// Upper spectral-efficiency boundary (bit/s/Hz) of each CQI interval.
/// Entry 15 is open-ended (+inf).
struct CqiTable {
  std::array<double, kCqiLevels> thresholds{};

  static CqiTable standard() {
    return {{0.15, 0.23, 0.38, 0.6, 0.88, 1.18, 1.48, 1.91, 2.41, 2.73, 3.32, 3.9,
             4.52, 5.12, 5.55, std::numeric_limits<double>::infinity()}};
  }

  /// Efficiency used to carry data at a reported CQI: the lower boundary of
  /// its interval (the upper boundary of CQI - 1). CQI 0 carries nothing.
  double efficiency(Cqi cqi) const {
    detail::require(cqi >= 0 && cqi < kCqiLevels, "CQI out of range: " + std::to_string(cqi));
    return cqi == 0 ? 0.0 : thresholds[static_cast<std::size_t>(cqi - 1)];
  }

  void validate() const {
    for (std::size_t i = 0; i < kCqiLevels; ++i) {
      detail::require(!std::isnan(thresholds[i]) && thresholds[i] > 0.0,
                      "CQI thresholds must be positive");
    }
    for (std::size_t i = 1; i + 1 < kCqiLevels; ++i) {
      detail::require(thresholds[i] > thresholds[i - 1],
                      "CQI thresholds must be strictly increasing through index 14");
    }
    detail::require(thresholds[15] >= thresholds[14], "CQI threshold 15 below threshold 14");
  }
};

/// Reads 16 whitespace-separated thresholds; '#' starts a comment. The last
/// entry may be "inf".
inline CqiTable load_cqi_table(std::istream& in) {
  CqiTable t;
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) {
      detail::require(n < kCqiLevels, "CQI table has more than 16 entries");
      try {
        std::size_t used = 0;
        t.thresholds[n] = std::stod(tok, &used);
        detail::require(used == tok.size(), "bad CQI threshold '" + tok + "'");
      } catch (const std::logic_error&) {
        throw ConfigError("bad CQI threshold '" + tok + "'");
      }
      ++n;
    }
  }
  detail::require(n == kCqiLevels, "CQI table needs 16 entries, got " + std::to_string(n));
  t.validate();
  return t;
}

inline CqiTable load_cqi_table_file(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), "cannot open CQI table " + path);
  return load_cqi_table(in);
}

/// Largest q with eta > threshold[q-1]; CQI 0 for eta <= threshold[0].
inline Cqi cqi_from_efficiency(double eta, const CqiTable& table = CqiTable::standard()) {
  detail::require(eta >= 0.0, "spectral efficiency must be non-negative");
  Cqi q = 0;
  while (q < kCqiLevels - 1 && eta > table.thresholds[static_cast<std::size_t>(q)]) ++q;
  return q;
}

/// Bits carried in one TTI over `bandwidth_hz` at the given CQI.
inline double rate_from_cqi(Cqi cqi, double bandwidth_hz, double tti_s,
                            const CqiTable& table = CqiTable::standard()) {
  return table.efficiency(cqi) * bandwidth_hz * tti_s;
}

}  // namespace ltesched
