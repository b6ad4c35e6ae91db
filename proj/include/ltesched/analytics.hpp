#pragma once

// Performance metrics: throughput and Jain fairness, inter-scheduling time
// statistics, DLL packet service-time moments, the BETS long-term throughput
// closed form and the FTGS opportunistic gain.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "error.hpp"
#include "linkadapt.hpp"
#include "schedulers.hpp"

namespace ltesched {

/// (sum x)^2 / (N sum x^2).
inline double jain_index(std::span<const double> x) {
  detail::require(!x.empty(), "jain_index needs at least one value");
  double s = 0.0;
  double s2 = 0.0;
  for (double v : x) {
    detail::require(v >= 0.0, "throughputs must be non-negative");
    s += v;
    s2 += v * v;
  }
  detail::require(s2 > 0.0, "jain_index undefined when every throughput is zero");
  return s * s / (static_cast<double>(x.size()) * s2);
}

struct ThroughputReport {
  std::vector<double> per_ue;  // bit/s
  double cell = 0.0;
  double jain = 1.0;
};

inline ThroughputReport make_throughput_report(std::vector<double> per_ue) {
  ThroughputReport r;
  r.cell = std::accumulate(per_ue.begin(), per_ue.end(), 0.0);
  r.jain = r.cell > 0.0 ? jain_index(per_ue) : 0.0;
  r.per_ue = std::move(per_ue);
  return r;
}

struct EcdfPoint {
  double delta_ms;
  double cumulative_probability;
};

struct DeltaStats {
  std::vector<std::uint32_t> samples;  // inter-scheduling times in TTIs
  double tti_s = 1e-3;
  double p_delta_1 = 0.0;
  std::vector<EcdfPoint> conditional_ecdf;  // of delta given delta > 1 TTI

  double mean_s() const {
    if (samples.empty()) return 0.0;
    double acc = 0.0;
    for (auto d : samples) acc += d;
    return acc / static_cast<double>(samples.size()) * tti_s;
  }
  double stddev_s() const {
    if (samples.size() < 2) return 0.0;
    const double m = mean_s() / tti_s;
    double acc = 0.0;
    for (auto d : samples) acc += (d - m) * (d - m);
    return std::sqrt(acc / static_cast<double>(samples.size())) * tti_s;
  }
  double max_ms() const {
    if (samples.empty()) return 0.0;
    return *std::max_element(samples.begin(), samples.end()) * tti_s * 1e3;
  }
};

/// Inter-scheduling statistics from the sorted TTI indices at which a UE was
/// scheduled.
inline DeltaStats delta_statistics(std::span<const std::uint64_t> scheduled_ttis, double tti_s) {
  detail::require(scheduled_ttis.size() >= 2,
                  "delta statistics need at least two scheduling events");
  DeltaStats st;
  st.tti_s = tti_s;
  st.samples.reserve(scheduled_ttis.size() - 1);
  for (std::size_t k = 1; k < scheduled_ttis.size(); ++k) {
    detail::require(scheduled_ttis[k] > scheduled_ttis[k - 1],
                    "scheduling events must be strictly increasing");
    st.samples.push_back(static_cast<std::uint32_t>(scheduled_ttis[k] - scheduled_ttis[k - 1]));
  }
  const auto n = static_cast<double>(st.samples.size());
  std::vector<std::uint32_t> tail;
  for (auto d : st.samples) {
    if (d > 1) tail.push_back(d);
  }
  st.p_delta_1 = (n - static_cast<double>(tail.size())) / n;
  std::sort(tail.begin(), tail.end());
  for (std::size_t k = 0; k < tail.size(); ++k) {
    if (k + 1 < tail.size() && tail[k + 1] == tail[k]) continue;
    st.conditional_ecdf.push_back(
        {tail[k] * tti_s * 1e3, static_cast<double>(k + 1) / static_cast<double>(tail.size())});
  }
  return st;
}

/// TTIs (sorted) in which `ue` owns at least one RBG.
inline std::vector<std::uint64_t> scheduled_ttis(const AllocationLog& log, int ue) {
  std::vector<std::uint64_t> out;
  for (const auto& e : log.entries) {
    if (e.ue == ue && (out.empty() || out.back() != e.tti)) out.push_back(e.tti);
  }
  return out;
}

inline DeltaStats delta_statistics(const AllocationLog& log, int ue, double tti_s) {
  const auto events = scheduled_ttis(log, ue);
  return delta_statistics(events, tti_s);
}

struct ServiceTimeMoments {
  double m_d = 0.0;      // s
  double sigma_d = 0.0;  // s
  double m_n = 0.0;      // scheduling events per packet
  double sigma_n = 0.0;
  struct Inputs {
    double m_delta, sigma_delta, m_b, sigma_b, packet_bits;
  } inputs{};
};

/// Mean and standard deviation of the time needed to drain an L-bit packet
/// when scheduling events are spaced by delta (mean m_delta, std sigma_delta)
/// and carry b bits (mean m_b, std sigma_b). The overshoot of the last event
/// is modelled as uniform on [0, b):
///   m_N = L / m_b + 1/2
///   sigma_N^2 = ((m_b^2 + 4 sigma_b^2) / 12 - m_N sigma_b^2) / m_b^2
///   m_D = m_N m_delta,  sigma_D^2 = m_N sigma_delta^2 + sigma_N^2 m_delta^2
inline ServiceTimeMoments dll_service_moments(double m_delta, double sigma_delta, double m_b,
                                              double sigma_b, double packet_bits) {
  detail::require(m_b > 0.0 && packet_bits > 0.0, "service moments need m_b > 0 and L > 0");
  detail::require(m_delta > 0.0 && sigma_delta >= 0.0 && sigma_b >= 0.0,
                  "service moments need m_delta > 0 and non-negative deviations");
  ServiceTimeMoments out;
  out.inputs = {m_delta, sigma_delta, m_b, sigma_b, packet_bits};
  out.m_n = packet_bits / m_b + 0.5;
  const double var_n =
      ((m_b * m_b + 4.0 * sigma_b * sigma_b) / 12.0 - out.m_n * sigma_b * sigma_b) / (m_b * m_b);
  if (var_n < 0.0) {
    throw NumericalError("service-time model inconsistent: derived variance of the event count is " +
                             std::to_string(var_n),
                         var_n);
  }
  out.sigma_n = std::sqrt(var_n);
  out.m_d = out.m_n * m_delta;
  out.sigma_d = std::sqrt(out.m_n * sigma_delta * sigma_delta + var_n * m_delta * m_delta);
  return out;
}

struct ServiceTimeSample {
  double mean_s = 0.0;
  double stddev_s = 0.0;
  std::size_t packets = 0;
};

/// Measured service times of back-to-back L-bit packets drained through a
/// sequence of scheduling events (TTI index, bits). A packet completes at the
/// first event whose cumulative bits reach L; excess bits are discarded and
/// D is the time since the previous completion.
inline ServiceTimeSample empirical_service_times(std::span<const std::uint64_t> event_ttis,
                                                 std::span<const double> event_bits,
                                                 double packet_bits, double tti_s) {
  detail::require(event_ttis.size() == event_bits.size(), "event TTIs and bits must align");
  detail::require(packet_bits > 0.0 && tti_s > 0.0, "packet size and TTI must be positive");
  std::vector<double> d;
  double acc = 0.0;
  std::uint64_t last = 0;
  bool started = false;
  for (std::size_t k = 0; k < event_ttis.size(); ++k) {
    if (!started) {
      // the first event only anchors the clock
      last = event_ttis[k];
      started = true;
      continue;
    }
    acc += event_bits[k];
    if (acc >= packet_bits) {
      d.push_back(static_cast<double>(event_ttis[k] - last) * tti_s);
      last = event_ttis[k];
      acc = 0.0;
    }
  }
  ServiceTimeSample out;
  out.packets = d.size();
  if (d.empty()) return out;
  out.mean_s = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(d.size());
  double v = 0.0;
  for (double x : d) v += (x - out.mean_s) * (x - out.mean_s);
  out.stddev_s = std::sqrt(v / static_cast<double>(d.size()));
  return out;
}

struct BetsClosedForm {
  std::vector<double> per_ue_rate;  // G_i: mean rate while scheduled, bit/s
  double cell_throughput = 0.0;     // S = N / sum(1/G_i)
  double efficiency = 0.0;          // S / B
  double per_ue_throughput() const {
    return per_ue_rate.empty() ? 0.0 : cell_throughput / static_cast<double>(per_ue_rate.size());
  }
};

/// Long-term BETS throughput with independent Rayleigh fading on a band of
/// `bandwidth_hz`: G_i = B log2(e) e^{Gamma/g_i} E1(Gamma/g_i).
inline BetsClosedForm bets_closed_form(std::span<const double> gamma_bars, const SnrGap& gap,
                                       double bandwidth_hz) {
  detail::require(!gamma_bars.empty(), "bets_closed_form needs at least one UE");
  detail::require(bandwidth_hz > 0.0, "bandwidth must be positive");
  BetsClosedForm out;
  double inv = 0.0;
  for (double g : gamma_bars) {
    const double rate = bandwidth_hz * rayleigh_mean_efficiency(g, gap);
    out.per_ue_rate.push_back(rate);
    inv += 1.0 / rate;
  }
  out.cell_throughput = static_cast<double>(gamma_bars.size()) / inv;
  out.efficiency = out.cell_throughput / bandwidth_hz;
  return out;
}

/// eta_FTGS / eta_BETS - 1.
inline double opportunistic_gain(double eta_ftgs, double eta_bets) {
  detail::require(eta_bets > 0.0, "opportunistic gain needs a positive BETS efficiency");
  return eta_ftgs / eta_bets - 1.0;
}

}  // namespace ltesched
