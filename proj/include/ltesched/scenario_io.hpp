#pragma once

// JSON scenario files and report serialization.
//
// A scenario file is one JSON object. Top-level keys:
//   name            string
//   ue_sinr_db      array of per-UE average SINRs (dB)
//   channel         object: type ("flat"|"selective"), pdp (built-in name,
//                   file path, or [[delay_ns, power_db], ...]), doppler_hz,
//                   model ("rayleigh"|"rician"), rice_k_db, los_doppler, oscillators, seed
//   scheduler       object: kind, mode, beta, alphas, zeta_init
//   duration_s, tti_s, rb_count, rbg_size, bandwidth_hz, target_ber,
//   rate_model ("continuous"|"quantized"),
//   wideband_cqi ("mean_sinr"|"median_sinr"|"subband_average"),
//   td_link ("capped"|"nominal"),
//   warmup_ttis, log_allocations, cqi_table (16 numbers or a file path)
//   variants        optional array of objects, each with a "label" and any
//                   of the keys above; each variant is merged over the base
//                   and run separately.
// Unknown keys are rejected.

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "sim_engine.hpp"

namespace ltesched {

using Json = nlohmann::json;

namespace detail {

inline void check_keys(const Json& obj, const std::set<std::string>& allowed,
                       const std::string& where) {
  require(obj.is_object(), where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

template <typename T>
T get_as(const Json& obj, const std::string& key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("bad value for key '" + where + key + "'");
  }
}

inline FadingModel parse_fading_model(const std::string& s) {
  if (s == "rayleigh") return FadingModel::kRayleigh;
  if (s == "rician") return FadingModel::kRician;
  throw ConfigError("bad value for key 'channel.model': " + s);
}

inline RateModel parse_rate_model(const std::string& s) {
  if (s == "continuous") return RateModel::kContinuous;
  if (s == "quantized") return RateModel::kQuantized;
  throw ConfigError("bad value for key 'rate_model': " + s);
}

inline TdLink parse_td_link(const std::string& s) {
  if (s == "capped") return TdLink::kCapped;
  if (s == "nominal") return TdLink::kNominal;
  throw ConfigError("bad value for key 'td_link': " + s);
}

inline WidebandAggregation parse_wideband(const std::string& s) {
  if (s == "mean_sinr") return WidebandAggregation::kMeanSinr;
  if (s == "median_sinr") return WidebandAggregation::kMedianSinr;
  if (s == "subband_average") return WidebandAggregation::kSubbandAverage;
  throw ConfigError("bad value for key 'wideband_cqi': " + s);
}

inline PowerDelayProfile parse_pdp(const Json& j) {
  if (j.is_string()) return resolve_pdp(j.get<std::string>());
  require(j.is_array(), "bad value for key 'channel.pdp'");
  PowerDelayProfile pdp{{}, "inline"};
  for (const auto& tap : j) {
    require(tap.is_array() && tap.size() == 2 && tap[0].is_number() && tap[1].is_number(),
            "bad value for key 'channel.pdp': taps are [delay_ns, power_db]");
    pdp.taps.push_back({tap[0].get<double>() * 1e-9, tap[1].get<double>()});
  }
  pdp.validate();
  return pdp;
}

inline void apply_channel(const Json& j, Scenario& sc) {
  static const std::set<std::string> keys{"type", "pdp", "doppler_hz", "model",
                                          "rice_k_db", "los_doppler", "oscillators", "seed"};
  check_keys(j, keys, "channel.");
  if (j.contains("type")) {
    const auto t = get_as<std::string>(j, "type", "channel.");
    if (t == "flat") {
      sc.channel = ChannelKind::kFlat;
    } else if (t == "selective") {
      sc.channel = ChannelKind::kSelective;
    } else {
      throw ConfigError("bad value for key 'channel.type': " + t);
    }
  }
  if (j.contains("pdp")) sc.pdp = parse_pdp(j.at("pdp"));
  if (j.contains("doppler_hz")) sc.fading.doppler_hz = get_as<double>(j, "doppler_hz", "channel.");
  if (j.contains("model")) sc.fading.model = parse_fading_model(get_as<std::string>(j, "model", "channel."));
  if (j.contains("rice_k_db")) sc.fading.rice_k_db = get_as<std::vector<double>>(j, "rice_k_db", "channel.");
  if (j.contains("los_doppler")) sc.fading.los_doppler = get_as<bool>(j, "los_doppler", "channel.");
  if (j.contains("oscillators")) sc.fading.oscillator_count = get_as<int>(j, "oscillators", "channel.");
  if (j.contains("seed")) sc.fading.seed = get_as<std::uint64_t>(j, "seed", "channel.");
}

inline void apply_scheduler(const Json& j, Scenario& sc) {
  static const std::set<std::string> keys{"kind", "mode", "beta", "alphas", "zeta_init"};
  check_keys(j, keys, "scheduler.");
  if (j.contains("kind")) sc.scheduler.kind = parse_scheduler_kind(get_as<std::string>(j, "kind", "scheduler."));
  if (j.contains("mode")) sc.scheduler.mode = parse_scheduling_mode(get_as<std::string>(j, "mode", "scheduler."));
  if (j.contains("beta")) sc.scheduler.beta = get_as<double>(j, "beta", "scheduler.");
  if (j.contains("zeta_init")) sc.scheduler.zeta_init = get_as<double>(j, "zeta_init", "scheduler.");
  if (j.contains("alphas")) {
    if (j.at("alphas").is_null()) {
      sc.scheduler.ftgs_alphas.reset();
    } else {
      sc.scheduler.ftgs_alphas = get_as<std::vector<double>>(j, "alphas", "scheduler.");
    }
  }
}

}  // namespace detail

/// Applies the keys present in `j` on top of `sc`.
inline void apply_scenario_json(const Json& j, Scenario& sc) {
  static const std::set<std::string> keys{
      "name", "label", "ue_sinr_db", "channel", "scheduler", "duration_s", "tti_s", "rb_count",
      "rbg_size", "bandwidth_hz", "target_ber", "rate_model", "wideband_cqi", "td_link", "warmup_ttis",
      "log_allocations", "cqi_table", "variants"};
  detail::check_keys(j, keys, "");
  using detail::get_as;
  if (j.contains("name")) sc.name = get_as<std::string>(j, "name", "");
  if (j.contains("label")) sc.name = get_as<std::string>(j, "label", "");
  if (j.contains("ue_sinr_db")) {
    sc.ues.clear();
    for (double db : get_as<std::vector<double>>(j, "ue_sinr_db", "")) sc.ues.push_back({db});
  }
  if (j.contains("channel")) detail::apply_channel(j.at("channel"), sc);
  if (j.contains("scheduler")) detail::apply_scheduler(j.at("scheduler"), sc);
  if (j.contains("duration_s")) sc.duration_s = get_as<double>(j, "duration_s", "");
  if (j.contains("tti_s")) sc.tti_s = get_as<double>(j, "tti_s", "");
  if (j.contains("rb_count")) sc.rb_count = get_as<int>(j, "rb_count", "");
  if (j.contains("rbg_size")) sc.rbg_size = get_as<int>(j, "rbg_size", "");
  if (j.contains("bandwidth_hz")) sc.bandwidth_hz = get_as<double>(j, "bandwidth_hz", "");
  if (j.contains("target_ber")) sc.target_ber = get_as<double>(j, "target_ber", "");
  if (j.contains("rate_model")) sc.rate_model = detail::parse_rate_model(get_as<std::string>(j, "rate_model", ""));
  if (j.contains("wideband_cqi")) sc.wideband = detail::parse_wideband(get_as<std::string>(j, "wideband_cqi", ""));
  if (j.contains("td_link")) sc.td_link = detail::parse_td_link(get_as<std::string>(j, "td_link", ""));
  if (j.contains("warmup_ttis")) sc.warmup_ttis = get_as<std::size_t>(j, "warmup_ttis", "");
  if (j.contains("log_allocations")) sc.log_allocations = get_as<bool>(j, "log_allocations", "");
  if (j.contains("cqi_table")) {
    const auto& t = j.at("cqi_table");
    if (t.is_string()) {
      sc.cqi_table = load_cqi_table_file(t.get<std::string>());
    } else {
      detail::require(t.is_array() && t.size() == kCqiLevels, "bad value for key 'cqi_table': needs 16 entries");
      for (std::size_t q = 0; q < kCqiLevels; ++q) {
        const auto& e = t[q];
        if (e.is_number()) {
          sc.cqi_table.thresholds[q] = e.get<double>();
        } else {
          detail::require(e == "inf", "bad value for key 'cqi_table': entries are numbers or \"inf\"");
          sc.cqi_table.thresholds[q] = std::numeric_limits<double>::infinity();
        }
      }
      sc.cqi_table.validate();
    }
  }
}

/// Expands a scenario document into one Scenario per variant (or one for
/// the base when there are no variants). Every result is validated.
inline std::vector<Scenario> parse_scenarios(const Json& doc) {
  Scenario base;
  Json base_doc = doc;
  Json variants = Json::array();
  if (doc.is_object() && doc.contains("variants")) {
    variants = doc.at("variants");
    detail::require(variants.is_array() && !variants.empty(),
                    "bad value for key 'variants': expected a non-empty array");
    base_doc.erase("variants");
  }
  apply_scenario_json(base_doc, base);
  std::vector<Scenario> out;
  if (variants.empty()) {
    base.validate();
    out.push_back(base);
    return out;
  }
  for (const auto& v : variants) {
    detail::require(v.is_object() && !v.contains("variants"), "variants cannot nest");
    Scenario sc = base;
    apply_scenario_json(v, sc);
    detail::require(v.contains("label"), "every variant needs a 'label'");
    sc.validate();
    out.push_back(std::move(sc));
  }
  return out;
}

inline std::vector<Scenario> load_scenarios(const std::string& path) {
  std::ifstream in(path);
  detail::require(in.good(), "cannot open scenario file " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario file " + path + " is not valid JSON: " + e.what());
  }
  return parse_scenarios(doc);
}

inline Json scenario_to_json(const Scenario& sc) {
  Json j;
  j["name"] = sc.name;
  j["ue_sinr_db"] = sc.sinr_db();
  Json ch;
  ch["type"] = std::string(to_string(sc.channel));
  if (sc.channel == ChannelKind::kSelective) {
    const auto& n = sc.pdp.name;
    if (n == "flat" || n == "pedestrian" || n == "vehicular" || n == "urban") {
      ch["pdp"] = n;
    } else {
      // Picosecond rounding keeps the ns/s conversion stable across round trips.
      Json taps = Json::array();
      for (const auto& t : sc.pdp.taps) taps.push_back({std::round(t.delay_s * 1e12) / 1e3, t.power_db});
      ch["pdp"] = taps;
    }
  }
  ch["doppler_hz"] = sc.fading.doppler_hz;
  ch["model"] = std::string(to_string(sc.fading.model));
  ch["rice_k_db"] = sc.fading.rice_k_db;
  ch["los_doppler"] = sc.fading.los_doppler;
  ch["oscillators"] = sc.fading.oscillator_count;
  ch["seed"] = sc.fading.seed;
  j["channel"] = ch;
  Json s;
  s["kind"] = std::string(to_string(sc.scheduler.kind));
  s["mode"] = std::string(to_string(sc.scheduler.mode));
  s["beta"] = sc.scheduler.beta;
  s["zeta_init"] = sc.scheduler.zeta_init;
  s["alphas"] = sc.scheduler.ftgs_alphas ? Json(*sc.scheduler.ftgs_alphas) : Json(nullptr);
  j["scheduler"] = s;
  j["duration_s"] = sc.duration_s;
  j["tti_s"] = sc.tti_s;
  j["rb_count"] = sc.rb_count;
  j["rbg_size"] = sc.rbg_size;
  j["bandwidth_hz"] = sc.bandwidth_hz;
  j["target_ber"] = sc.target_ber;
  j["rate_model"] = std::string(to_string(sc.rate_model));
  j["wideband_cqi"] = std::string(to_string(sc.wideband));
  j["td_link"] = std::string(to_string(sc.td_link));
  j["warmup_ttis"] = sc.warmup_ttis;
  j["log_allocations"] = sc.log_allocations;
  j["cqi_table"] = Json::array();
  for (std::size_t q = 0; q + 1 < kCqiLevels; ++q) j["cqi_table"].push_back(sc.cqi_table.thresholds[q]);
  j["cqi_table"].push_back("inf");
  return j;
}

inline Json report_to_json(const SimReport& rep) {
  Json j;
  j["scenario"] = scenario_to_json(rep.scenario);
  j["warmup_ttis"] = rep.warmup_ttis;
  j["measured_ttis"] = rep.measured_ttis;
  j["cell_throughput_bps"] = rep.throughput.cell;
  j["cell_efficiency"] = cell_efficiency(rep);
  j["jain"] = rep.throughput.jain;
  j["worst_ue"] = rep.worst_ue();
  Json ues = Json::array();
  for (std::size_t i = 0; i < rep.throughput.per_ue.size(); ++i) {
    Json u;
    u["ue"] = i;
    u["avg_sinr_db"] = rep.scenario.ues[i].avg_sinr_db;
    u["throughput_bps"] = rep.throughput.per_ue[i];
    u["granted_bits"] = rep.granted_bits[i];
    u["scheduling_events"] = rep.events[i];
    u["p_delta_1"] = rep.delta[i].p_delta_1;
    u["delta_mean_ms"] = rep.delta[i].mean_s() * 1e3;
    u["delta_std_ms"] = rep.delta[i].stddev_s() * 1e3;
    u["delta_max_ms"] = rep.delta[i].max_ms();
    u["bits_per_event_mean"] = rep.event_bits[i].mean;
    u["bits_per_event_std"] = rep.event_bits[i].stddev;
    ues.push_back(u);
  }
  j["ues"] = ues;
  return j;
}

/// Fixed 6-significant-digit formatting used for CSV output.
inline std::string fmt6(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline void write_ecdf_csv(std::ostream& os, const DeltaStats& st) {
  os << "delta_ms,cumulative_probability\n";
  for (const auto& p : st.conditional_ecdf) os << fmt6(p.delta_ms) << ',' << fmt6(p.cumulative_probability) << '\n';
}

inline void write_ftgs_csv(std::ostream& os, const FtgsParameters& prm) {
  os << "i,gamma_bar_db,alpha,p,rbar_over_w\n";
  for (std::size_t i = 0; i < prm.size(); ++i) {
    os << i + 1 << ',' << fmt6(linear_to_db(prm.gamma_bar[i])) << ',' << fmt6(prm.alpha[i] / prm.bandwidth)
       << ',' << fmt6(prm.p[i]) << ',' << fmt6(prm.rbar[i] / prm.bandwidth) << '\n';
  }
}

}  // namespace ltesched
