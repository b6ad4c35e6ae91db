#pragma once

// Per-TTI downlink allocation for MTS, BETS, PFS and FTGS in time-domain
// (all RBGs to one UE) and frequency-domain (per-RBG) modes, and the
// exponentially smoothed past-throughput state shared by BETS and PFS.

#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"

namespace ltesched {

enum class SchedulerKind { kMts, kBets, kPfs, kFtgs };
enum class SchedulingMode { kTd, kFd };

inline std::string_view to_string(SchedulerKind k) {
  switch (k) {
    case SchedulerKind::kMts: return "MTS";
    case SchedulerKind::kBets: return "BETS";
    case SchedulerKind::kPfs: return "PFS";
    case SchedulerKind::kFtgs: return "FTGS";
  }
  return "?";
}

inline std::string_view to_string(SchedulingMode m) { return m == SchedulingMode::kTd ? "TD" : "FD"; }

inline SchedulerKind parse_scheduler_kind(std::string_view s) {
  if (s == "MTS" || s == "mts") return SchedulerKind::kMts;
  if (s == "BETS" || s == "bets") return SchedulerKind::kBets;
  if (s == "PFS" || s == "pfs") return SchedulerKind::kPfs;
  if (s == "FTGS" || s == "ftgs") return SchedulerKind::kFtgs;
  throw ConfigError("unknown scheduler '" + std::string(s) + "'");
}

inline SchedulingMode parse_scheduling_mode(std::string_view s) {
  if (s == "TD" || s == "td") return SchedulingMode::kTd;
  if (s == "FD" || s == "fd") return SchedulingMode::kFd;
  throw ConfigError("unknown scheduling mode '" + std::string(s) + "'");
}

struct SchedulerConfig {
  SchedulerKind kind = SchedulerKind::kMts;
  SchedulingMode mode = SchedulingMode::kTd;
  double beta = 0.99;
  std::optional<std::vector<double>> ftgs_alphas;
  double zeta_init = 1.0;  // bit/s

  void validate(std::size_t n_ues) const {
    detail::require(beta >= 0.0 && beta <= 1.0, "beta must lie in [0, 1]");
    detail::require(zeta_init > 0.0, "zeta_init must be positive");
    if (kind == SchedulerKind::kFtgs) {
      detail::require(ftgs_alphas.has_value(), "FTGS requires per-UE alpha weights");
      detail::require(ftgs_alphas->size() == n_ues, "FTGS alpha count must equal the UE count");
      for (double a : *ftgs_alphas) detail::require(a > 0.0, "FTGS alphas must be positive");
    }
  }
};

struct SchedulerState {
  std::vector<double> zeta;  // past average throughput, bit/s
  std::uint64_t tti_index = 0;

  static SchedulerState initial(std::size_t n_ues, double zeta_init) {
    return {std::vector<double>(n_ues, zeta_init), 0};
  }
};

/// Achievable bits for one TTI. `wideband` holds the bits each RBG would
/// carry at the UE's wideband CQI; `subband` the bits at each RBG's own CQI.
struct RateGrid {
  std::size_t ues = 0;
  std::size_t rbgs = 0;
  double tti_s = 1e-3;
  std::vector<double> wideband;  // per UE, bits per RBG
  std::vector<double> subband;   // (ue, rbg), bits

  RateGrid() = default;
  RateGrid(std::size_t n_ues, std::size_t n_rbgs, double tti)
      : ues(n_ues), rbgs(n_rbgs), tti_s(tti), wideband(n_ues, 0.0), subband(n_ues * n_rbgs, 0.0) {}

  double& at(std::size_t ue, std::size_t rbg) { return subband[ue * rbgs + rbg]; }
  double at(std::size_t ue, std::size_t rbg) const { return subband[ue * rbgs + rbg]; }

  /// Bits of a whole TTI at the wideband CQI, summed RBG by RBG.
  double wideband_bits(std::size_t ue) const {
    double b = 0.0;
    for (std::size_t l = 0; l < rbgs; ++l) b += wideband[ue];
    return b;
  }
  /// r_i(k) in bit/s.
  double wideband_rate(std::size_t ue) const { return wideband_bits(ue) / tti_s; }
  /// r_i(k, l) in bit/s.
  double subband_rate(std::size_t ue, std::size_t rbg) const { return at(ue, rbg) / tti_s; }
};

struct Allocation {
  std::vector<int> owner;            // per RBG
  std::vector<double> granted_bits;  // per UE
};

namespace detail {

inline void check_inputs(const RateGrid& rates, const SchedulerState& state,
                         const SchedulerConfig& config) {
  require(rates.ues >= 1, "scheduler needs at least one UE");
  require(state.zeta.size() == rates.ues, "scheduler state size does not match the UE count");
  config.validate(rates.ues);
}

// Argmax with ties to the lowest index.
template <typename Metric>
std::size_t argmax(std::size_t n, Metric&& metric) {
  std::size_t best = 0;
  double best_v = metric(0);
  for (std::size_t i = 1; i < n; ++i) {
    const double v = metric(i);
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

// Lowest zeta among UEs with a usable rate; a UE reporting CQI 0 (zero rate)
// is only served when no UE can use the resource.
template <typename Rate>
std::size_t lowest_zeta(const std::vector<double>& zeta, Rate&& rate) {
  std::size_t best = zeta.size();
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    if (rate(i) > 0.0 && (best == zeta.size() || zeta[i] < zeta[best])) best = i;
  }
  if (best != zeta.size()) return best;
  best = 0;
  for (std::size_t i = 1; i < zeta.size(); ++i) {
    if (zeta[i] < zeta[best]) best = i;
  }
  return best;
}

}  // namespace detail

/// Time-domain winner of TTI k: argmax over UEs of the scheduler metric on the
/// wideband rate. BETS only considers UEs with a positive rate and falls back
/// to all UEs when every rate is zero.
inline std::size_t td_select(const RateGrid& rates, const SchedulerState& state,
                             const SchedulerConfig& config) {
  detail::check_inputs(rates, state, config);
  const std::size_t n = rates.ues;
  switch (config.kind) {
    case SchedulerKind::kMts:
      return detail::argmax(n, [&](std::size_t i) { return rates.wideband_rate(i); });
    case SchedulerKind::kBets:
      return detail::lowest_zeta(state.zeta, [&](std::size_t i) { return rates.wideband[i]; });
    case SchedulerKind::kPfs:
      return detail::argmax(n, [&](std::size_t i) { return rates.wideband_rate(i) / state.zeta[i]; });
    case SchedulerKind::kFtgs: {
      const auto& alpha = *config.ftgs_alphas;
      return detail::argmax(n, [&](std::size_t i) { return rates.wideband_rate(i) / alpha[i]; });
    }
  }
  return 0;
}

/// All RBGs to the td_select winner at its wideband rate.
inline Allocation td_allocate(const RateGrid& rates, const SchedulerState& state,
                              const SchedulerConfig& config) {
  const std::size_t winner = td_select(rates, state, config);
  Allocation a{std::vector<int>(rates.rbgs, static_cast<int>(winner)),
               std::vector<double>(rates.ues, 0.0)};
  a.granted_bits[winner] = rates.wideband_bits(winner);
  return a;
}

/// Frequency-domain allocation of every RBG.
///
/// MTS, PFS and FTGS take the per-RBG argmax of their metric on the subband
/// rate, with the PFS denominator held at its start-of-TTI value. BETS hands
/// RBGs to the UE with the lowest expected throughput, where each RBG adds
/// (1 - beta) r_i(k) / M to a scratch copy of beta * zeta; a UE with zero
/// rate on the RBG is skipped unless all are zero.
inline Allocation fd_allocate(const RateGrid& rates, const SchedulerState& state,
                              const SchedulerConfig& config) {
  detail::check_inputs(rates, state, config);
  detail::require(rates.rbgs >= 1, "FD allocation needs at least one RBG");
  const std::size_t n = rates.ues;
  const std::size_t m = rates.rbgs;
  Allocation a{std::vector<int>(m, 0), std::vector<double>(n, 0.0)};

  if (config.kind == SchedulerKind::kBets) {
    std::vector<double> expected(n);
    for (std::size_t i = 0; i < n; ++i) expected[i] = config.beta * state.zeta[i];
    const double mrbg = static_cast<double>(m);
    for (std::size_t l = 0; l < m; ++l) {
      const std::size_t u = detail::lowest_zeta(expected, [&](std::size_t i) { return rates.at(i, l); });
      a.owner[l] = static_cast<int>(u);
      a.granted_bits[u] += rates.at(u, l);
      expected[u] += (1.0 - config.beta) * rates.wideband_rate(u) / mrbg;
    }
    return a;
  }

  for (std::size_t l = 0; l < m; ++l) {
    std::size_t u = 0;
    switch (config.kind) {
      case SchedulerKind::kMts:
        u = detail::argmax(n, [&](std::size_t i) { return rates.subband_rate(i, l); });
        break;
      case SchedulerKind::kPfs:
        u = detail::argmax(n, [&](std::size_t i) { return rates.subband_rate(i, l) / state.zeta[i]; });
        break;
      case SchedulerKind::kFtgs: {
        const auto& alpha = *config.ftgs_alphas;
        u = detail::argmax(n, [&](std::size_t i) { return rates.subband_rate(i, l) / alpha[i]; });
        break;
      }
      case SchedulerKind::kBets:
        break;
    }
    a.owner[l] = static_cast<int>(u);
    a.granted_bits[u] += rates.at(u, l);
  }
  return a;
}

inline Allocation allocate(const RateGrid& rates, const SchedulerState& state,
                           const SchedulerConfig& config) {
  return config.mode == SchedulingMode::kTd ? td_allocate(rates, state, config)
                                            : fd_allocate(rates, state, config);
}

/// zeta_i <- beta zeta_i + (1 - beta) r_i with r_i the granted bits over the TTI
/// duration (zero for unscheduled UEs).
inline SchedulerState update_state(const SchedulerState& state, const Allocation& allocation,
                                   const RateGrid& rates, const SchedulerConfig& config) {
  detail::require(allocation.granted_bits.size() == state.zeta.size(),
                  "allocation size does not match the scheduler state");
  SchedulerState next = state;
  for (std::size_t i = 0; i < next.zeta.size(); ++i) {
    const double r = allocation.granted_bits[i] / rates.tti_s;
    next.zeta[i] = config.beta * state.zeta[i] + (1.0 - config.beta) * r;
  }
  ++next.tti_index;
  return next;
}

/// Flat record of every (tti, rbg) grant.
struct AllocationLog {
  struct Entry {
    std::uint64_t tti;
    std::uint32_t rbg;
    std::int32_t ue;
    double bits;
  };
  std::vector<Entry> entries;

  void append(std::uint64_t tti, const Allocation& a, const RateGrid& rates,
              SchedulingMode mode) {
    for (std::size_t l = 0; l < a.owner.size(); ++l) {
      const auto ue = static_cast<std::size_t>(a.owner[l]);
      const double bits = mode == SchedulingMode::kTd ? rates.wideband[ue] : rates.at(ue, l);
      entries.push_back({tti, static_cast<std::uint32_t>(l), a.owner[l], bits});
    }
  }

  bool operator==(const AllocationLog& o) const {
    if (entries.size() != o.entries.size()) return false;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const auto& x = entries[i];
      const auto& y = o.entries[i];
      if (x.tti != y.tti || x.rbg != y.rbg || x.ue != y.ue || x.bits != y.bits) return false;
    }
    return true;
  }
};

/// CSV with header `tti,rbg,ue,bits`; bits printed with round-trip precision.
inline void write_allocation_csv(std::ostream& os, const AllocationLog& log) {
  os << "tti,rbg,ue,bits\n";
  char buf[64];
  for (const auto& e : log.entries) {
    std::snprintf(buf, sizeof buf, "%.17g", e.bits);
    os << e.tti << ',' << e.rbg << ',' << e.ue << ',' << buf << '\n';
  }
}

}  // namespace ltesched
