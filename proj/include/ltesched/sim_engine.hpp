#pragma once

// TTI-level downlink simulation of a single cell with saturated (full-buffer)
// UEs: channel sampling, CQI reporting, scheduling, state update and metric
// accumulation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "analytics.hpp"
#include "channel.hpp"
#include "error.hpp"
#include "ftgs_solver.hpp"
#include "linkadapt.hpp"
#include "schedulers.hpp"
#include "units.hpp"

namespace ltesched {

enum class ChannelKind { kFlat, kSelective };
enum class RateModel { kContinuous, kQuantized };

/// How the wideband CQI summarizes the per-RBG channel.
enum class WidebandAggregation {
  kMeanSinr,        // CQI of the mean linear SINR
  kMedianSinr,      // CQI of the median linear SINR
  kSubbandAverage,  // floor of the mean subband CQI (mean efficiency when continuous)
};

/// Bits a TD grant delivers on each RBG.
enum class TdLink {
  kNominal,  // wideband rate on every RBG
  kCapped,   // min(wideband, subband) per RBG: RBGs below the wideband MCS carry only their own rate
};

inline std::string_view to_string(TdLink t) { return t == TdLink::kNominal ? "nominal" : "capped"; }

inline std::string_view to_string(RateModel m) {
  return m == RateModel::kContinuous ? "continuous" : "quantized";
}
inline std::string_view to_string(ChannelKind k) { return k == ChannelKind::kFlat ? "flat" : "selective"; }
inline std::string_view to_string(WidebandAggregation a) {
  switch (a) {
    case WidebandAggregation::kMeanSinr: return "mean_sinr";
    case WidebandAggregation::kMedianSinr: return "median_sinr";
    case WidebandAggregation::kSubbandAverage: return "subband_average";
  }
  return "?";
}
inline std::string_view to_string(FadingModel m) { return m == FadingModel::kRayleigh ? "rayleigh" : "rician"; }

struct UeProfile {
  double avg_sinr_db = 0.0;
};

struct Scenario {
  std::string name = "scenario";
  std::vector<UeProfile> ues;
  ChannelKind channel = ChannelKind::kFlat;
  PowerDelayProfile pdp = flat_pdp();
  FadingSpec fading;
  SchedulerConfig scheduler;
  double duration_s = 60.0;  // measured window, after warm-up
  double tti_s = 1e-3;
  int rb_count = 25;
  int rbg_size = 2;
  double bandwidth_hz = 5e6;
  double target_ber = 5e-5;
  RateModel rate_model = RateModel::kQuantized;
  WidebandAggregation wideband = WidebandAggregation::kMeanSinr;
  TdLink td_link = TdLink::kCapped;
  std::size_t warmup_ttis = 1000;
  bool log_allocations = false;
  CqiTable cqi_table = CqiTable::standard();

  std::size_t rbg_count() const { return static_cast<std::size_t>(rb_count / rbg_size); }
  double rb_bandwidth() const { return bandwidth_hz / rb_count; }
  double rbg_bandwidth() const { return rb_bandwidth() * rbg_size; }
  /// Bandwidth actually allocated per TTI (remainder RBs excluded).
  double scheduled_bandwidth() const { return rbg_bandwidth() * static_cast<double>(rbg_count()); }
  std::size_t measured_ttis() const {
    return static_cast<std::size_t>(std::llround(duration_s / tti_s));
  }
  std::size_t total_ttis() const { return warmup_ttis + measured_ttis(); }
  SnrGap gap() const { return snr_gap(target_ber); }

  std::vector<double> sinr_db() const {
    std::vector<double> v;
    for (const auto& u : ues) v.push_back(u.avg_sinr_db);
    return v;
  }
  std::vector<double> sinr_linear() const {
    std::vector<double> v;
    for (const auto& u : ues) v.push_back(db_to_linear(u.avg_sinr_db));
    return v;
  }

  void validate() const {
    detail::require(!ues.empty(), "scenario needs at least one UE");
    for (const auto& u : ues) detail::require(std::isfinite(u.avg_sinr_db), "UE SINR must be finite");
    detail::require(tti_s > 0.0, "tti must be positive");
    detail::require(duration_s > 0.0, "duration must be positive");
    const double ratio = duration_s / tti_s;
    detail::require(std::abs(ratio - std::round(ratio)) < 1e-6 * std::max(1.0, ratio),
                    "duration must be an integral number of TTIs");
    detail::require(rb_count >= 1 && rbg_size >= 1 && rbg_size <= rb_count,
                    "rb_count and rbg_size must satisfy 1 <= rbg_size <= rb_count");
    detail::require(bandwidth_hz > 0.0, "bandwidth must be positive");
    if (channel == ChannelKind::kSelective) pdp.validate();
    fading.validate(channel == ChannelKind::kSelective ? pdp.taps.size() : 1);
    cqi_table.validate();
    (void)gap();
    if (scheduler.kind != SchedulerKind::kFtgs || scheduler.ftgs_alphas) {
      scheduler.validate(ues.size());
    } else {
      detail::require(scheduler.beta >= 0.0 && scheduler.beta <= 1.0, "beta must lie in [0, 1]");
    }
  }
};

struct EventBits {
  double mean = 0.0;    // bits per scheduling event
  double stddev = 0.0;
};

struct SimReport {
  Scenario scenario;  // resolved, including solved FTGS weights
  ThroughputReport throughput;
  std::vector<double> granted_bits;         // per UE over the measured window
  std::vector<std::uint64_t> events;        // scheduling events per UE
  std::vector<DeltaStats> delta;            // empty samples when < 2 events
  std::vector<EventBits> event_bits;
  std::vector<std::vector<std::uint64_t>> event_ttis;  // per UE, TTI of each scheduling event
  std::vector<std::vector<double>> event_bit_seq;      // per UE, bits of each event
  std::optional<AllocationLog> allocation_log;
  std::size_t warmup_ttis = 0;
  std::size_t measured_ttis = 0;

  /// UE with the fewest scheduling events (lowest index on ties).
  std::size_t worst_ue() const {
    return static_cast<std::size_t>(std::min_element(events.begin(), events.end()) - events.begin());
  }

  /// Service-time moments of an L-bit packet for one UE.
  ServiceTimeMoments service_moments(std::size_t ue, double packet_bits) const {
    return dll_service_moments(delta[ue].mean_s(), delta[ue].stddev_s(), event_bits[ue].mean,
                               event_bits[ue].stddev, packet_bits);
  }

  /// Service times of L-bit packets measured on the scheduling events.
  ServiceTimeSample measured_service(std::size_t ue, double packet_bits) const {
    return empirical_service_times(event_ttis[ue], event_bit_seq[ue], packet_bits, scenario.tti_s);
  }
};

/// Fills in FTGS weights from the solver when the scenario does not carry them.
inline Scenario resolve_scenario(Scenario sc) {
  sc.validate();
  if (sc.scheduler.kind == SchedulerKind::kFtgs && !sc.scheduler.ftgs_alphas) {
    const auto g = sc.sinr_linear();
    sc.scheduler.ftgs_alphas = solve_ftgs(g, sc.gap(), sc.scheduled_bandwidth()).alpha;
  }
  sc.scheduler.validate(sc.ues.size());
  return sc;
}

inline ChannelTrace generate_trace(const Scenario& sc) {
  if (sc.channel == ChannelKind::kFlat) {
    return generate_flat_trace(sc.fading, sc.ues.size(), sc.total_ttis(), sc.rbg_count(), sc.tti_s);
  }
  return generate_selective_trace(sc.pdp, sc.fading, sc.ues.size(), sc.total_ttis(), sc.rbg_count(),
                                  sc.rbg_bandwidth(), sc.tti_s);
}

namespace detail {

class RateBuilder {
 public:
  explicit RateBuilder(const Scenario& sc)
      : sc_(sc),
        gap_(sc.gap()),
        sinr_(sc.sinr_linear()),
        bits_per_eta_(sc.rbg_bandwidth() * sc.tti_s),
        sinr_buf_(sc.rbg_count()),
        cqi_buf_(sc.rbg_count()) {}

  void fill(const ChannelTrace& trace, std::size_t tti, RateGrid& grid) {
    const std::size_t m = grid.rbgs;
    for (std::size_t ue = 0; ue < grid.ues; ++ue) {
      const auto gains = trace.row(ue, tti);
      bool flat = true;
      for (std::size_t l = 0; l < m; ++l) {
        sinr_buf_[l] = sinr_[ue] * static_cast<double>(gains[l]);
        flat = flat && gains[l] == gains[0];
      }
      double eta_sum = 0.0;
      int cqi_sum = 0;
      for (std::size_t l = 0; l < m; ++l) {
        const double eta = std::log2(1.0 + sinr_buf_[l] / gap_.gamma);
        if (sc_.rate_model == RateModel::kContinuous) {
          grid.at(ue, l) = eta * bits_per_eta_;
        } else {
          cqi_buf_[l] = cqi_from_efficiency(eta, sc_.cqi_table);
          grid.at(ue, l) = sc_.cqi_table.efficiency(cqi_buf_[l]) * bits_per_eta_;
          cqi_sum += cqi_buf_[l];
        }
        eta_sum += eta;
      }
      if (flat) {
        grid.wideband[ue] = grid.at(ue, 0);
        continue;
      }
      grid.wideband[ue] = wideband_bits(m, eta_sum, cqi_sum);
    }
  }

 private:
  double bits_for_sinr(double sinr) const {
    const double eta = std::log2(1.0 + sinr / gap_.gamma);
    if (sc_.rate_model == RateModel::kContinuous) return eta * bits_per_eta_;
    return sc_.cqi_table.efficiency(cqi_from_efficiency(eta, sc_.cqi_table)) * bits_per_eta_;
  }

  double wideband_bits(std::size_t m, double eta_sum, int cqi_sum) {
    switch (sc_.wideband) {
      case WidebandAggregation::kMeanSinr: {
        double acc = 0.0;
        for (std::size_t l = 0; l < m; ++l) acc += sinr_buf_[l];
        return bits_for_sinr(acc / static_cast<double>(m));
      }
      case WidebandAggregation::kMedianSinr: {
        auto v = std::vector<double>(sinr_buf_.begin(), sinr_buf_.begin() + static_cast<long>(m));
        std::sort(v.begin(), v.end());
        const double med = m % 2 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
        return bits_for_sinr(med);
      }
      case WidebandAggregation::kSubbandAverage:
        if (sc_.rate_model == RateModel::kContinuous) {
          return eta_sum / static_cast<double>(m) * bits_per_eta_;
        }
        return sc_.cqi_table.efficiency(cqi_sum / static_cast<int>(m)) * bits_per_eta_;
    }
    return 0.0;
  }

  const Scenario& sc_;
  SnrGap gap_;
  std::vector<double> sinr_;
  double bits_per_eta_;
  std::vector<double> sinr_buf_;
  std::vector<Cqi> cqi_buf_;
};

}  // namespace detail

/// Runs a scenario on a pre-generated trace covering total_ttis() TTIs.
inline SimReport run_on_trace(const Scenario& scenario, const ChannelTrace& trace) {
  Scenario sc = resolve_scenario(scenario);
  const std::size_t n = sc.ues.size();
  const std::size_t m = sc.rbg_count();
  detail::require(trace.ue_count() == n, "trace UE count does not match the scenario");
  detail::require(trace.rbg_count() == m, "trace RBG count does not match the scenario");
  detail::require(trace.tti_count() >= sc.total_ttis(), "trace is shorter than the scenario");

  detail::RateBuilder builder(sc);
  RateGrid grid(n, m, sc.tti_s);
  auto state = SchedulerState::initial(n, sc.scheduler.zeta_init);

  std::vector<double> bits(n, 0.0);
  std::vector<std::vector<std::uint64_t>> event_ttis(n);
  std::vector<std::vector<double>> event_bits(n);
  std::optional<AllocationLog> log;
  if (sc.log_allocations) {
    log.emplace();
    log->entries.reserve(sc.measured_ttis() * m);
  }

  std::vector<bool> owns(n);
  const bool capped = sc.scheduler.mode == SchedulingMode::kTd && sc.td_link == TdLink::kCapped;
  std::vector<double> td_bits(m);
  const std::size_t total = sc.total_ttis();
  for (std::size_t k = 0; k < total; ++k) {
    builder.fill(trace, k, grid);
    Allocation alloc = allocate(grid, state, sc.scheduler);
    if (capped) {
      const auto w = static_cast<std::size_t>(alloc.owner[0]);
      double b = 0.0;
      for (std::size_t l = 0; l < m; ++l) {
        td_bits[l] = std::min(grid.wideband[w], grid.at(w, l));
        b += td_bits[l];
      }
      alloc.granted_bits[w] = b;
    }
    state = update_state(state, alloc, grid, sc.scheduler);
    if (k < sc.warmup_ttis) continue;
    std::fill(owns.begin(), owns.end(), false);
    for (int o : alloc.owner) owns[static_cast<std::size_t>(o)] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (owns[i]) {
        bits[i] += alloc.granted_bits[i];
        event_ttis[i].push_back(k);
        event_bits[i].push_back(alloc.granted_bits[i]);
      }
    }
    if (log) {
      if (capped) {
        for (std::size_t l = 0; l < m; ++l) {
          log->entries.push_back({k, static_cast<std::uint32_t>(l), alloc.owner[l], td_bits[l]});
        }
      } else {
        log->append(k, alloc, grid, sc.scheduler.mode);
      }
    }
  }

  SimReport rep;
  rep.warmup_ttis = sc.warmup_ttis;
  rep.measured_ttis = sc.measured_ttis();
  const double window = static_cast<double>(rep.measured_ttis) * sc.tti_s;
  std::vector<double> tput(n);
  for (std::size_t i = 0; i < n; ++i) {
    tput[i] = bits[i] / window;
    rep.granted_bits.push_back(bits[i]);
    rep.events.push_back(event_ttis[i].size());
    rep.delta.push_back(event_ttis[i].size() >= 2 ? delta_statistics(event_ttis[i], sc.tti_s)
                                                  : DeltaStats{{}, sc.tti_s, 0.0, {}});
    EventBits eb;
    if (!event_bits[i].empty()) {
      double s = 0.0;
      for (double b : event_bits[i]) s += b;
      eb.mean = s / static_cast<double>(event_bits[i].size());
      double v = 0.0;
      for (double b : event_bits[i]) v += (b - eb.mean) * (b - eb.mean);
      eb.stddev = std::sqrt(v / static_cast<double>(event_bits[i].size()));
    }
    rep.event_bits.push_back(eb);
  }
  rep.throughput = make_throughput_report(std::move(tput));
  rep.event_ttis = std::move(event_ttis);
  rep.event_bit_seq = std::move(event_bits);
  rep.allocation_log = std::move(log);
  rep.scenario = std::move(sc);
  return rep;
}

inline SimReport run(const Scenario& scenario) {
  const Scenario sc = resolve_scenario(scenario);
  return run_on_trace(sc, generate_trace(sc));
}

/// n average SINRs equally spaced in linear scale from min_db to max_db.
inline std::vector<double> linear_spaced_sinrs_db(double min_db, double max_db, std::size_t n) {
  detail::require(n >= 2, "SINR span needs at least two UEs");
  detail::require(min_db <= max_db, "minimum SINR above maximum");
  const double lo = db_to_linear(min_db);
  const double hi = db_to_linear(max_db);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = linear_to_db(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
  }
  out.back() = max_db;
  return out;
}

/// Linearly spaced SINRs ending at gamma_max_db whose mean cell SINR equals
/// mu_target_db: the linear mean of a linear ramp is its midpoint, so the
/// minimum is 2 mu - gamma_max in linear scale.
inline std::vector<double> sinr_span_scenario(double gamma_max_db, double mu_target_db,
                                              std::size_t n_ues) {
  detail::require(n_ues >= 2, "SINR span needs at least two UEs");
  const double lo = 2.0 * db_to_linear(mu_target_db) - db_to_linear(gamma_max_db);
  detail::require(mu_target_db <= gamma_max_db && lo > 0.0,
                  "mean cell SINR target must lie in (gamma_max - 3.01 dB, gamma_max]");
  return linear_spaced_sinrs_db(linear_to_db(lo), gamma_max_db, n_ues);
}

/// Same as above, parameterized by the dB span between minimum and maximum.
inline std::vector<double> sinr_span_from_width(double gamma_max_db, double span_db,
                                                std::size_t n_ues) {
  detail::require(span_db >= 0.0, "SINR span must be non-negative");
  return linear_spaced_sinrs_db(gamma_max_db - span_db, gamma_max_db, n_ues);
}

/// Cell spectral efficiency over the scheduled bandwidth.
inline double cell_efficiency(const SimReport& rep) {
  return rep.throughput.cell / rep.scenario.scheduled_bandwidth();
}

}  // namespace ltesched
