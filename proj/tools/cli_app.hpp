#pragma once

// ltesched command-line front end. Kept in a header so the test suite can
// drive it in-process.

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ltesched/ltesched.hpp"

namespace ltesched::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

inline constexpr const char* kOutDirEnv = "LTESCHED_OUT_DIR";

inline std::string default_out_dir() {
  const char* v = std::getenv(kOutDirEnv);
  return v && *v ? std::string(v) : std::string("ltesched-out");
}

inline std::string file_stem(const std::string& name) {
  std::string s;
  for (char c : name) s += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.') ? c : '_';
  return s.empty() ? "scenario" : s;
}

/// Accepts "10,12.5,15" or a path to a file with one value per line
/// ('#' comments allowed).
inline std::vector<double> parse_value_list(const std::string& arg, const std::string& what) {
  std::vector<double> out;
  auto parse_token = [&](std::string tok) {
    const auto b = tok.find_first_not_of(" \t\r");
    if (b == std::string::npos) return;
    tok = tok.substr(b, tok.find_last_not_of(" \t\r") - b + 1);
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != tok.size()) throw ConfigError("bad value '" + tok + "' in " + what);
    out.push_back(v);
  };
  if (std::filesystem::is_regular_file(arg)) {
    std::ifstream in(arg);
    std::string line;
    while (std::getline(in, line)) {
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.resize(hash);
      std::stringstream ss(line);
      std::string tok;
      while (std::getline(ss, tok, ',')) parse_token(tok);
    }
  } else {
    std::stringstream ss(arg);
    std::string tok;
    while (std::getline(ss, tok, ',')) parse_token(tok);
  }
  if (out.empty()) throw ConfigError(what + " is empty");
  return out;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream f(p);
  if (!f) throw ConfigError("cannot write " + p.string());
  return f;
}

struct SolveArgs {
  std::string sinrs;
  double ber = 5e-5;
  double bandwidth = 4.8e6;
  std::string out;
};

inline int cmd_solve(const SolveArgs& a, std::ostream& out) {
  const auto db = parse_value_list(a.sinrs, "--sinrs-db");
  std::vector<double> lin;
  for (double d : db) lin.push_back(db_to_linear(d));
  const auto prm = solve_ftgs(lin, snr_gap(a.ber), a.bandwidth);
  if (a.out.empty() || a.out == "-") {
    write_ftgs_csv(out, prm);
  } else {
    auto f = open_out(a.out);
    write_ftgs_csv(f, prm);
    out << "wrote " << a.out << " (" << prm.iterations << " iterations, residual " << fmt6(prm.residual)
        << ")\n";
  }
  return kExitOk;
}

struct RunArgs {
  std::string scenario;
  std::string out_dir;
  bool log_allocations = false;
};

inline void write_run_outputs(const SimReport& rep, const std::filesystem::path& dir) {
  const std::string stem = file_stem(rep.scenario.name);
  {
    auto f = open_out(dir / (stem + ".json"));
    f << report_to_json(rep).dump(2) << '\n';
  }
  {
    auto f = open_out(dir / (stem + "_ues.csv"));
    f << "ue,avg_sinr_db,throughput_bps,p_delta_1,delta_max_ms\n";
    for (std::size_t i = 0; i < rep.throughput.per_ue.size(); ++i) {
      f << i << ',' << fmt6(rep.scenario.ues[i].avg_sinr_db) << ',' << fmt6(rep.throughput.per_ue[i]) << ','
        << fmt6(rep.delta[i].p_delta_1) << ',' << fmt6(rep.delta[i].max_ms()) << '\n';
    }
  }
  {
    auto f = open_out(dir / (stem + "_ecdf_worst.csv"));
    write_ecdf_csv(f, rep.delta[rep.worst_ue()]);
  }
  if (rep.allocation_log) {
    auto f = open_out(dir / (stem + "_alloc.csv"));
    write_allocation_csv(f, *rep.allocation_log);
  }
}

inline int cmd_run(const RunArgs& a, std::ostream& out) {
  auto scenarios = load_scenarios(a.scenario);
  const std::string dir = a.out_dir.empty() ? default_out_dir() : a.out_dir;
  ensure_dir(dir);
  for (auto& sc : scenarios) {
    if (a.log_allocations) sc.log_allocations = true;
    const auto rep = run(sc);
    write_run_outputs(rep, dir);
    out << rep.scenario.name << ": cell " << fmt6(rep.throughput.cell / 1e6) << " Mbit/s, jain "
        << fmt6(rep.throughput.jain) << '\n';
  }
  return kExitOk;
}

struct SweepArgs {
  std::string vary;
  std::string values;
  std::string base;
  std::string out_dir;
  double gamma_max_db = 25.0;
  double mu_db = 24.0;
  std::string n_ues = "10";
};

struct SweepPoint {
  std::size_t n = 0;
  double mu_db = 0.0;
  double eta_ftgs = 0.0;
  double eta_bets = 0.0;
  double phi = 0.0;
};

/// FTGS and BETS on the same trace with linearly spaced SINRs ending at
/// gamma_max_db.
inline SweepPoint sweep_point(const Scenario& base, std::size_t n, double mu_db, double gamma_max_db) {
  Scenario sc = base;
  sc.ues.clear();
  for (double d : sinr_span_scenario(gamma_max_db, mu_db, n)) sc.ues.push_back({d});
  sc.scheduler.ftgs_alphas.reset();
  sc.log_allocations = false;
  const auto trace = generate_trace(sc);
  SweepPoint p{n, mu_db, 0.0, 0.0, 0.0};
  sc.scheduler.kind = SchedulerKind::kFtgs;
  p.eta_ftgs = cell_efficiency(run_on_trace(sc, trace));
  sc.scheduler.kind = SchedulerKind::kBets;
  p.eta_bets = cell_efficiency(run_on_trace(sc, trace));
  p.phi = opportunistic_gain(p.eta_ftgs, p.eta_bets);
  return p;
}

inline int cmd_sweep(const SweepArgs& a, std::ostream& out) {
  if (a.vary != "mu_db" && a.vary != "n_ues") throw ConfigError("--vary must be mu_db or n_ues");
  Scenario base;
  if (!a.base.empty()) {
    auto v = load_scenarios(a.base);
    detail::require(v.size() == 1, "sweep base scenario must not contain variants");
    base = v.front();
  }
  const auto values = parse_value_list(a.values, "--values");
  std::vector<std::pair<std::size_t, double>> points;
  if (a.vary == "mu_db") {
    for (double n : parse_value_list(a.n_ues, "--n-ues")) {
      detail::require(n >= 2 && n == std::floor(n), "--n-ues entries must be integers >= 2");
      for (double mu : values) points.emplace_back(static_cast<std::size_t>(n), mu);
    }
  } else {
    for (double n : values) {
      detail::require(n >= 2 && n == std::floor(n), "n_ues values must be integers >= 2");
      points.emplace_back(static_cast<std::size_t>(n), a.mu_db);
    }
  }
  // validate every point before launching work
  for (const auto& [n, mu] : points) (void)sinr_span_scenario(a.gamma_max_db, mu, n);

  std::vector<std::future<SweepPoint>> jobs;
  for (const auto& [n, mu] : points) {
    jobs.push_back(std::async(std::launch::async, sweep_point, std::cref(base), n, mu, a.gamma_max_db));
  }
  std::vector<SweepPoint> res;
  for (auto& j : jobs) res.push_back(j.get());

  const std::string dir = a.out_dir.empty() ? default_out_dir() : a.out_dir;
  ensure_dir(dir);
  const auto path = std::filesystem::path(dir) / ("sweep_" + a.vary + ".csv");
  auto f = open_out(path);
  f << "n_ues,mu_db,eta_ftgs,eta_bets,phi\n";
  for (const auto& p : res) {
    f << p.n << ',' << fmt6(p.mu_db) << ',' << fmt6(p.eta_ftgs) << ',' << fmt6(p.eta_bets) << ','
      << fmt6(p.phi) << '\n';
  }
  out << "wrote " << path.string() << " (" << res.size() << " points)\n";
  return kExitOk;
}

inline int cmd_channel_info(const std::string& pdp_arg, std::ostream& out) {
  const auto pdp = resolve_pdp(pdp_arg);
  pdp.validate();
  out << "pdp " << pdp.name << "\n";
  out << "tau_rms_ns " << fmt6(rms_delay_spread(pdp) * 1e9) << "\n";
  out << "delay_ns,power_db\n";
  for (const auto& t : pdp.taps) out << fmt6(t.delay_s * 1e9) << ',' << fmt6(t.power_db) << '\n';
  return kExitOk;
}

/// Parses and executes one invocation; returns the process exit code.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"LTE downlink scheduler simulator"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* s = app.add_subcommand("solve-ftgs", "solve FTGS weights for a set of average SINRs");
  s->add_option("--sinrs-db", solve.sinrs, "comma-separated dB values or a file")->required();
  s->add_option("--ber", solve.ber, "target BER");
  s->add_option("--bandwidth", solve.bandwidth, "scheduled bandwidth W in Hz");
  s->add_option("--out", solve.out, "CSV output path (stdout if omitted)");

  RunArgs runa;
  auto* r = app.add_subcommand("run", "run a scenario file");
  r->add_option("--scenario", runa.scenario, "scenario JSON")->required();
  r->add_option("--out-dir", runa.out_dir, std::string("output directory (default $") + kOutDirEnv + ")");
  r->add_flag("--log-allocations", runa.log_allocations, "write per-RBG allocation CSVs");

  SweepArgs sw;
  auto* w = app.add_subcommand("sweep", "opportunistic-gain sweep (FTGS vs BETS)");
  w->add_option("--vary", sw.vary, "mu_db or n_ues")->required();
  w->add_option("--values", sw.values, "comma-separated values or a file")->required();
  w->add_option("--scenario-base", sw.base, "base scenario JSON (SINRs are replaced)");
  w->add_option("--out-dir", sw.out_dir, "output directory");
  w->add_option("--gamma-max-db", sw.gamma_max_db, "highest average SINR");
  w->add_option("--mu-db", sw.mu_db, "mean cell SINR when varying n_ues");
  w->add_option("--n-ues", sw.n_ues, "UE counts when varying mu_db");

  std::string pdp_arg;
  auto* c = app.add_subcommand("channel-info", "rms delay spread and taps of a PDP");
  c->add_option("--pdp", pdp_arg, "built-in name or file")->required();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*s) return cmd_solve(solve, out);
    if (*r) return cmd_run(runa, out);
    if (*w) return cmd_sweep(sw, out);
    if (*c) return cmd_channel_info(pdp_arg, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << " (residual " << fmt6(e.residual()) << ")\n";
    return kExitNumerical;
  }
  return kExitConfig;
}

}  // namespace ltesched::cli
