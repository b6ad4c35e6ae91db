#include <gtest/gtest.h>

#include "ltesched/sim_engine.hpp"
#include "oracles.hpp"

using namespace ltesched;

namespace {

Scenario cell(SchedulerKind k, SchedulingMode m = SchedulingMode::kTd, double seconds = 5.0) {
  Scenario s;
  for (double d : oracle::kCellSinrDb) s.ues.push_back({d});
  s.scheduler.kind = k;
  s.scheduler.mode = m;
  s.duration_s = seconds;
  return s;
}

}  // namespace

TEST(Scenario, DerivedQuantities) {
  Scenario s;
  s.ues = {{10.0}};
  EXPECT_EQ(s.rbg_count(), 12u);
  EXPECT_DOUBLE_EQ(s.rbg_bandwidth(), 400e3);
  EXPECT_DOUBLE_EQ(s.scheduled_bandwidth(), 4.8e6);
  EXPECT_EQ(s.measured_ttis(), 60000u);
  EXPECT_EQ(s.total_ttis(), 61000u);
}

TEST(Scenario, Validation) {
  Scenario s;
  EXPECT_THROW(s.validate(), ConfigError);
  s.ues = {{10.0}};
  s.duration_s = 0.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.duration_s = 1.0005;
  EXPECT_THROW(s.validate(), ConfigError);
  s.duration_s = 1.0;
  s.rbg_size = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s.rbg_size = 2;
  s.target_ber = 0.3;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Run, SingleUeOwnsEverything) {
  Scenario s;
  s.ues = {{12.0}};
  s.duration_s = 2.0;
  s.log_allocations = true;
  for (auto k : {SchedulerKind::kMts, SchedulerKind::kBets, SchedulerKind::kPfs, SchedulerKind::kFtgs}) {
    s.scheduler.kind = k;
    const auto r = run(s);
    EXPECT_EQ(r.events[0], 2000u);
    EXPECT_DOUBLE_EQ(r.delta[0].p_delta_1, 1.0);
    double bits = 0.0;
    for (const auto& e : r.allocation_log->entries) {
      EXPECT_EQ(e.ue, 0);
      bits += e.bits;
    }
    EXPECT_NEAR(bits, r.granted_bits[0], 1e-6);
  }
}

TEST(Run, ThroughputAccountingAndTwelveRbgsPerTti) {
  for (auto mode : {SchedulingMode::kTd, SchedulingMode::kFd}) {
    auto s = cell(SchedulerKind::kPfs, mode, 2.0);
    s.channel = ChannelKind::kSelective;
    s.pdp = builtin_pdp("urban");
    s.log_allocations = true;
    const auto r = run(s);
    EXPECT_EQ(r.allocation_log->entries.size(), 2000u * 12u);
    std::vector<double> bits(10, 0.0);
    for (const auto& e : r.allocation_log->entries) bits[static_cast<std::size_t>(e.ue)] += e.bits;
    for (std::size_t i = 0; i < 10; ++i) {
      EXPECT_NEAR(bits[i], r.granted_bits[i], 1e-6 * std::max(1.0, bits[i]));
      EXPECT_NEAR(r.throughput.per_ue[i] * 2.0, r.granted_bits[i], 1e-6 * std::max(1.0, bits[i]));
    }
  }
}

TEST(Run, BitReproducible) {
  auto s = cell(SchedulerKind::kFtgs, SchedulingMode::kFd, 1.0);
  s.channel = ChannelKind::kSelective;
  s.pdp = builtin_pdp("vehicular");
  s.log_allocations = true;
  const auto a = run(s);
  const auto b = run(s);
  EXPECT_TRUE(*a.allocation_log == *b.allocation_log);
  EXPECT_EQ(a.throughput.per_ue, b.throughput.per_ue);
}

TEST(Run, FlatFdEqualsTdForMtsAndFtgs) {
  for (auto k : {SchedulerKind::kMts, SchedulerKind::kFtgs}) {
    auto s = cell(k, SchedulingMode::kTd, 3.0);
    s.log_allocations = true;
    const auto tr = generate_trace(s);
    const auto td = run_on_trace(s, tr);
    s.scheduler.mode = SchedulingMode::kFd;
    const auto fd = run_on_trace(s, tr);
    EXPECT_TRUE(*td.allocation_log == *fd.allocation_log) << to_string(k);
  }
}

TEST(Run, FtgsEqualAlphasReproduceMts) {
  auto s = cell(SchedulerKind::kFtgs, SchedulingMode::kFd, 2.0);
  s.channel = ChannelKind::kSelective;
  s.pdp = builtin_pdp("urban");
  s.log_allocations = true;
  s.scheduler.ftgs_alphas = std::vector<double>(10, 3.0);
  const auto tr = generate_trace(s);
  const auto f = run_on_trace(s, tr);
  s.scheduler.kind = SchedulerKind::kMts;
  const auto m = run_on_trace(s, tr);
  EXPECT_TRUE(*f.allocation_log == *m.allocation_log);
}

TEST(Run, CappedTdLinkNeverExceedsNominal) {
  auto s = cell(SchedulerKind::kMts, SchedulingMode::kTd, 2.0);
  s.channel = ChannelKind::kSelective;
  s.pdp = builtin_pdp("vehicular");
  const auto tr = generate_trace(s);
  s.td_link = TdLink::kNominal;
  const auto nominal = run_on_trace(s, tr);
  s.td_link = TdLink::kCapped;
  const auto capped = run_on_trace(s, tr);
  EXPECT_LT(capped.throughput.cell, nominal.throughput.cell);
  // Same decisions: MTS ignores delivered bits.
  EXPECT_EQ(capped.events, nominal.events);

  auto f = cell(SchedulerKind::kMts, SchedulingMode::kTd, 2.0);
  const auto ftr = generate_trace(f);
  f.td_link = TdLink::kNominal;
  const auto fn = run_on_trace(f, ftr);
  f.td_link = TdLink::kCapped;
  EXPECT_EQ(run_on_trace(f, ftr).throughput.per_ue, fn.throughput.per_ue);
}

TEST(Run, BetsMatchesClosedFormWhenFadingIsFast) {
  // At 2 kHz Doppler successive TTIs are nearly independent, which is the
  // closed form's assumption.
  auto s = cell(SchedulerKind::kBets, SchedulingMode::kTd, 30.0);
  s.fading.doppler_hz = 2000.0;
  s.rate_model = RateModel::kContinuous;
  s.scheduler.beta = 0.999;
  const auto r = run(s);
  const auto cf = bets_closed_form(s.sinr_linear(), s.gap(), s.scheduled_bandwidth());
  for (double x : r.throughput.per_ue) EXPECT_NEAR(x, cf.per_ue_throughput(), 0.03 * cf.per_ue_throughput());
  EXPECT_GE(r.throughput.jain, 0.99);
}

TEST(Run, FtgsSolvedWeightsAreUsedAndEchoed) {
  auto s = cell(SchedulerKind::kFtgs, SchedulingMode::kTd, 1.0);
  const auto r = run(s);
  ASSERT_TRUE(r.scenario.scheduler.ftgs_alphas.has_value());
  const auto& a = *r.scenario.scheduler.ftgs_alphas;
  EXPECT_NEAR(a[0] / r.scenario.scheduled_bandwidth(), oracle::kAlphaOverW[0], 1e-3);
}

TEST(SinrSpan, MeanCellSinrHitsTarget) {
  for (std::size_t n : {2u, 5u, 10u, 20u}) {
    for (double mu : {22.5, 23.5, 24.5, 25.0}) {
      const auto v = sinr_span_scenario(25.0, mu, n);
      ASSERT_EQ(v.size(), n);
      EXPECT_NEAR(mean_cell_sinr(v), mu, 0.01);
      EXPECT_DOUBLE_EQ(v.back(), 25.0);
      std::vector<double> lin;
      for (double d : v) lin.push_back(oracle::db2lin(d));
      for (std::size_t i = 2; i < n; ++i) {
        const double d1 = lin[i] - lin[i - 1];
        const double d0 = lin[1] - lin[0];
        EXPECT_NEAR(d1, d0, 1e-9 * std::max(1.0, std::abs(d0)));
      }
    }
  }
  EXPECT_THROW(sinr_span_scenario(25.0, 21.0, 5), ConfigError);
  EXPECT_THROW(sinr_span_scenario(25.0, 26.0, 5), ConfigError);
  const auto zero = sinr_span_from_width(25.0, 0.0, 2);
  EXPECT_NEAR(zero[0], 25.0, 1e-12);
  EXPECT_NEAR(zero[1], 25.0, 1e-12);
}
