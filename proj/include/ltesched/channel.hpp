#pragma once

// Fading channel generation: flat and tapped-delay-line frequency-selective
// Rayleigh/Rician power-gain traces with Jakes temporal correlation, plus
// delay-spread and SINR helpers.

#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "units.hpp"

namespace ltesched {

struct Tap {
  double delay_s = 0.0;
  double power_db = 0.0;
};

struct PowerDelayProfile {
  std::vector<Tap> taps;
  std::string name;

  void validate() const {
    detail::require(!taps.empty(), "power delay profile needs at least one tap");
    detail::require(taps.front().delay_s >= 0.0, "first tap delay must be >= 0");
    for (std::size_t i = 0; i < taps.size(); ++i) {
      detail::require(std::isfinite(taps[i].power_db) && std::isfinite(taps[i].delay_s),
                      "tap values must be finite");
      if (i > 0) {
        detail::require(taps[i].delay_s > taps[i - 1].delay_s,
                        "tap delays must be strictly increasing");
      }
    }
  }

  /// Linear tap powers normalized to unit sum.
  std::vector<double> normalized_powers() const {
    std::vector<double> p;
    p.reserve(taps.size());
    for (const auto& t : taps) p.push_back(db_to_linear(t.power_db));
    const double total = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& v : p) v /= total;
    return p;
  }
};

inline PowerDelayProfile make_pdp(std::string name,
                                  std::initializer_list<std::pair<double, double>> ns_db) {
  PowerDelayProfile pdp{{}, std::move(name)};
  for (const auto& [ns, db] : ns_db) pdp.taps.push_back({ns * 1e-9, db});
  return pdp;
}

/// Single zero-delay tap.
inline PowerDelayProfile flat_pdp() { return make_pdp("flat", {{0.0, 0.0}}); }

/// Built-in profiles: "flat", "pedestrian", "vehicular", "urban".
inline PowerDelayProfile builtin_pdp(const std::string& name) {
  if (name == "flat") return flat_pdp();
  if (name == "pedestrian") {
    return make_pdp(name, {{0, 0.0}, {30, -1.0}, {70, -2.0}, {90, -3.0}, {120, -8.0},
                           {190, -17.2}, {410, -20.8}});
  }
  if (name == "vehicular") {
    return make_pdp(name, {{0, 0.0}, {30, -1.5}, {150, -1.4}, {310, -3.6}, {370, -0.6},
                           {710, -9.1}, {1090, -7.0}, {1730, -12.0}, {2510, -16.9}});
  }
  if (name == "urban") {
    return make_pdp(name, {{0, -1.0}, {50, -1.0}, {120, -1.0}, {200, 0.0}, {230, 0.0},
                           {500, 0.0}, {1600, -3.0}, {2300, -5.0}, {5000, -7.0}});
  }
  throw ConfigError("unknown power delay profile '" + name + "'");
}

/// Plain-text table, one tap per line: `delay_ns power_db`. Blank lines and
/// '#' comments are ignored.
inline PowerDelayProfile load_pdp(std::istream& in, std::string name = "custom") {
  PowerDelayProfile pdp{{}, std::move(name)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    std::istringstream ls(line);
    double ns = 0.0;
    double db = 0.0;
    if (!(ls >> ns)) continue;
    detail::require(static_cast<bool>(ls >> db),
                    "PDP line " + std::to_string(lineno) + ": expected 'delay_ns power_db'");
    pdp.taps.push_back({ns * 1e-9, db});
  }
  pdp.validate();
  return pdp;
}

inline PowerDelayProfile load_pdp_file(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), "cannot open PDP file " + path);
  return load_pdp(in, path);
}

/// Resolves a built-in name, otherwise treats the argument as a file path.
inline PowerDelayProfile resolve_pdp(const std::string& name_or_path) {
  for (const char* n : {"flat", "pedestrian", "vehicular", "urban"}) {
    if (name_or_path == n) return builtin_pdp(name_or_path);
  }
  return load_pdp_file(name_or_path);
}

/// Power-weighted second central moment of the tap delays, square-rooted.
inline double rms_delay_spread(const PowerDelayProfile& pdp) {
  pdp.validate();
  if (pdp.taps.size() == 1) return 0.0;
  const auto w = pdp.normalized_powers();
  double m1 = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m1 += w[i] * pdp.taps[i].delay_s;
    m2 += w[i] * pdp.taps[i].delay_s * pdp.taps[i].delay_s;
  }
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

enum class FadingModel { kRayleigh, kRician };

struct FadingSpec {
  double doppler_hz = 120.0;
  FadingModel model = FadingModel::kRayleigh;
  std::vector<double> rice_k_db;  // K factor per leading tap (Rician only)
  bool los_doppler = true;        // LOS phase rotates at nu_d cos(theta), theta uniform
  int oscillator_count = 32;
  std::uint64_t seed = 1;

  void validate(std::size_t tap_count) const {
    detail::require(doppler_hz > 0.0, "Doppler spread must be positive");
    detail::require(oscillator_count >= 8, "oscillator_count must be >= 8");
    if (model == FadingModel::kRician) {
      detail::require(rice_k_db.size() <= tap_count, "more Rice factors than taps");
      for (double k : rice_k_db) detail::require(std::isfinite(k), "Rice factor must be finite");
    }
  }
};

/// Unit-mean power gains indexed (ue, tti, rbg).
class ChannelTrace {
 public:
  ChannelTrace() = default;
  ChannelTrace(std::size_t ues, std::size_t ttis, std::size_t rbgs, double tti_s)
      : ues_(ues), ttis_(ttis), rbgs_(rbgs), tti_s_(tti_s), gains_(ues * ttis * rbgs, 0.0f) {}

  std::size_t ue_count() const { return ues_; }
  std::size_t tti_count() const { return ttis_; }
  std::size_t rbg_count() const { return rbgs_; }
  double tti_duration() const { return tti_s_; }

  float gain(std::size_t ue, std::size_t tti, std::size_t rbg) const {
    return gains_[index(ue, tti, rbg)];
  }
  float& gain(std::size_t ue, std::size_t tti, std::size_t rbg) {
    return gains_[index(ue, tti, rbg)];
  }
  /// Gains of every RBG for one (ue, tti).
  std::span<const float> row(std::size_t ue, std::size_t tti) const {
    return {gains_.data() + index(ue, tti, 0), rbgs_};
  }
  std::span<float> row(std::size_t ue, std::size_t tti) {
    return {gains_.data() + index(ue, tti, 0), rbgs_};
  }
  const std::vector<float>& data() const { return gains_; }

 private:
  std::size_t index(std::size_t ue, std::size_t tti, std::size_t rbg) const {
    return (ue * ttis_ + tti) * rbgs_ + rbg;
  }

  std::size_t ues_ = 0;
  std::size_t ttis_ = 0;
  std::size_t rbgs_ = 0;
  double tti_s_ = 1e-3;
  std::vector<float> gains_;
};

namespace detail {

inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t ue, std::uint64_t tap) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(ue), static_cast<std::uint32_t>(tap), 0x6c7465u};
  return std::mt19937_64(seq);
}

/// Sum-of-sinusoids Jakes process with unit mean power: M complex
/// oscillators at Doppler shifts nu_d cos(a_n), a_n = (2 pi n - pi + theta)/M
/// with random theta and random phases. Its autocorrelation approaches
/// J0(2 pi nu_d tau).
inline std::vector<std::complex<double>> jakes_process(double doppler_hz, int oscillators,
                                                       std::size_t samples, double dt,
                                                       std::mt19937_64& rng) {
  constexpr double kPi = std::numbers::pi;
  const auto m = static_cast<std::size_t>(oscillators);
  const double theta = (2.0 * uniform01(rng) - 1.0) * kPi;
  std::vector<double> omega(m);
  std::vector<double> phase(m);
  for (std::size_t n = 0; n < m; ++n) {
    const double a = (2.0 * kPi * static_cast<double>(n + 1) - kPi + theta) / static_cast<double>(m);
    omega[n] = 2.0 * kPi * doppler_hz * std::cos(a);
    phase[n] = 2.0 * kPi * uniform01(rng);
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  std::vector<std::complex<double>> out(samples);
  std::vector<std::complex<double>> z(m);
  std::vector<std::complex<double>> step(m);
  for (std::size_t n = 0; n < m; ++n) step[n] = std::polar(1.0, omega[n] * dt);
  constexpr std::size_t kResync = 1024;  // bounds phasor-recurrence drift
  for (std::size_t k = 0; k < samples; ++k) {
    if (k % kResync == 0) {
      const double t = static_cast<double>(k) * dt;
      for (std::size_t n = 0; n < m; ++n) z[n] = std::polar(1.0, omega[n] * t + phase[n]);
    }
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t n = 0; n < m; ++n) {
      acc += z[n];
      z[n] *= step[n];
    }
    out[k] = acc * scale;
  }
  return out;
}

}  // namespace detail

/// Frequency-selective trace: each tap is an independent Jakes process
/// (optionally plus a constant-amplitude line-of-sight term), the per-RBG gain is
/// |H(f_l)|^2 at the RBG centre frequency, normalized to unit mean.
inline ChannelTrace generate_selective_trace(const PowerDelayProfile& pdp, const FadingSpec& spec,
                                             std::size_t n_ues, std::size_t n_ttis,
                                             std::size_t rbg_count, double rbg_bandwidth_hz,
                                             double tti_s = 1e-3) {
  pdp.validate();
  spec.validate(pdp.taps.size());
  detail::require(n_ttis >= 1, "trace needs at least one TTI");
  detail::require(rbg_count >= 1, "trace needs at least one RBG");
  detail::require(n_ues >= 1, "trace needs at least one UE");

  const std::size_t taps = pdp.taps.size();
  const auto power = pdp.normalized_powers();

  // LOS/diffuse split per tap.
  std::vector<double> los_amp(taps, 0.0);
  std::vector<double> diffuse_amp(taps, 1.0);
  if (spec.model == FadingModel::kRician) {
    for (std::size_t j = 0; j < spec.rice_k_db.size(); ++j) {
      const double k = db_to_linear(spec.rice_k_db[j]);
      los_amp[j] = std::sqrt(k / (k + 1.0));
      diffuse_amp[j] = std::sqrt(1.0 / (k + 1.0));
    }
  }

  // Per-(rbg, tap) phase rotation exp(-j 2 pi f_l tau_j).
  constexpr double kPi = std::numbers::pi;
  std::vector<std::complex<double>> rot(rbg_count * taps);
  for (std::size_t l = 0; l < rbg_count; ++l) {
    const double f = (static_cast<double>(l) + 0.5 - static_cast<double>(rbg_count) / 2.0) *
                     rbg_bandwidth_hz;
    for (std::size_t j = 0; j < taps; ++j) {
      rot[l * taps + j] =
          std::sqrt(power[j]) * std::polar(1.0, -2.0 * kPi * f * pdp.taps[j].delay_s);
    }
  }

  ChannelTrace trace(n_ues, n_ttis, rbg_count, tti_s);
  std::vector<std::vector<std::complex<double>>> tap_gain(taps);
  for (std::size_t ue = 0; ue < n_ues; ++ue) {
    for (std::size_t j = 0; j < taps; ++j) {
      auto rng = detail::stream_rng(spec.seed, ue, j);
      tap_gain[j] = detail::jakes_process(spec.doppler_hz, spec.oscillator_count, n_ttis, tti_s, rng);
      if (los_amp[j] > 0.0) {
        const double ph0 = 2.0 * kPi * detail::uniform01(rng);
        const double wlos = spec.los_doppler
                                ? 2.0 * kPi * spec.doppler_hz * std::cos(2.0 * kPi * detail::uniform01(rng))
                                : 0.0;
        for (std::size_t k = 0; k < n_ttis; ++k) {
          const auto los = std::polar(los_amp[j], ph0 + wlos * static_cast<double>(k) * tti_s);
          tap_gain[j][k] = los + diffuse_amp[j] * tap_gain[j][k];
        }
      }
    }
    for (std::size_t k = 0; k < n_ttis; ++k) {
      auto out = trace.row(ue, k);
      if (taps == 1) {
        const auto g = static_cast<float>(std::norm(tap_gain[0][k]));
        for (auto& v : out) v = g;
        continue;
      }
      for (std::size_t l = 0; l < rbg_count; ++l) {
        std::complex<double> h{0.0, 0.0};
        for (std::size_t j = 0; j < taps; ++j) h += rot[l * taps + j] * tap_gain[j][k];
        out[l] = static_cast<float>(std::norm(h));
      }
    }
  }
  return trace;
}

/// Flat fading: every RBG of a (ue, tti) carries the same gain. Same random
/// streams as a single-tap selective trace.
inline ChannelTrace generate_flat_trace(const FadingSpec& spec, std::size_t n_ues,
                                        std::size_t n_ttis, std::size_t rbg_count,
                                        double tti_s = 1e-3) {
  return generate_selective_trace(flat_pdp(), spec, n_ues, n_ttis, rbg_count, 1.0, tti_s);
}

inline double instantaneous_sinr(double avg_sinr, double gain) {
  detail::require(avg_sinr > 0.0 && gain >= 0.0, "instantaneous_sinr: bad arguments");
  return gain * avg_sinr;
}

/// 10 log10 of the linear mean of the per-UE average SINRs.
inline double mean_cell_sinr(std::span<const double> avg_sinrs_db) {
  detail::require(!avg_sinrs_db.empty(), "mean_cell_sinr needs at least one UE");
  double acc = 0.0;
  for (double db : avg_sinrs_db) acc += db_to_linear(db);
  return linear_to_db(acc / static_cast<double>(avg_sinrs_db.size()));
}

}  // namespace ltesched
