#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rnelab/io.hpp"
#include "rnelab/market.hpp"
#include "rnelab/stats.hpp"

using namespace rnelab;
using namespace rnelab::market;

namespace {

MarketConfig small_config(std::size_t n = 4000) {
  MarketConfig c;
  c.n_assets = n;
  c.truth = {0.49, 9.0};
  c.inference.dt = 0.05;
  c.inference.t_max = 5.0;
  c.record_times = {1.0, 2.5};
  return c;
}

std::string panel_bytes(const MarketPanel& p) {
  std::ostringstream os;
  io::write_panel_csv(os, p);
  return os.str();
}

}  // namespace

TEST(MarketConfig, Priors) {
  const auto c = small_config();
  EXPECT_NEAR(odds_for(c.reference_prior()), (0.49 / 0.51) / 9.0, 1e-15);
  EXPECT_NEAR(odds_for(c.rne_prior(+1)), (0.49 / 0.51) / 13.5, 1e-15);
  EXPECT_NEAR(odds_for(c.rne_prior(-1)), (0.49 / 0.51) / 6.0, 1e-15);
  EXPECT_EQ(c.steps(), 50u);
}

TEST(MarketConfig, RejectsOffGridRecordTimes) {
  auto c = small_config();
  c.record_times = {1.01};
  EXPECT_THROW(c.validate(), InputError);
  c.record_times = {6.0};
  EXPECT_THROW(c.validate(), InputError);
}

TEST(MarketConfig, RejectsInconsistentTradingSignal) {
  auto c = small_config();
  c.pricing.rZ_delta = 0.1;
  c.pricing.sigma_Z = 0.5;
  c.inference.sigma_lZ = 0.3;
  EXPECT_THROW(c.validate(), InputError);
  c.inference.sigma_lZ = 0.2;
  EXPECT_NO_THROW(c.validate());
}

TEST(Simulate, ResourceGuard) {
  auto c = small_config(1000000);
  c.max_work = 1e6;
  EXPECT_THROW(simulate_market(c, 1), ResourceError);
}

TEST(Simulate, ByteIdenticalAcrossThreads) {
  auto c = small_config(3000);
  c.threads = 1;
  const auto a = panel_bytes(simulate_market(c, 77));
  for (unsigned w : {4u, 8u}) {
    c.threads = w;
    EXPECT_EQ(a, panel_bytes(simulate_market(c, 77)));
  }
  EXPECT_NE(a, panel_bytes(simulate_market(c, 78)));
}

TEST(Simulate, RecordsConserveK) {
  const auto p = simulate_market(small_config(2000), 3);
  for (const auto& a : p.assets)
    for (const auto& r : a.records) {
      const double ratio = odds_for(r.pi) / (r.Pi / r.Pi_complement);
      ASSERT_NEAR(ratio / std::pow(1.5, a.sign_change), 1.0, 1e-9);
    }
}

TEST(Simulate, OutcomeAndSignFrequencies) {
  const auto p = simulate_market(small_config(20000), 5);
  std::size_t ones = 0, plus_sign = 0;
  for (const auto& a : p.assets) {
    ones += indicator(a.b);
    plus_sign += a.sign_change > 0;
  }
  const double n = 20000;
  EXPECT_NEAR(ones / n, 0.49, 4 * std::sqrt(0.25 / n));
  EXPECT_NEAR(plus_sign / n, 0.5, 4 * std::sqrt(0.25 / n));
}

TEST(Simulate, TruePosteriorIsCalibrated) {
  // E[1_B | p_t] = p_t: the mean gap 1_B - p_t vanishes
  const auto p = simulate_market(small_config(20000), 6);
  stats::MeanAccumulator gap;
  for (const auto& a : p.assets) gap.add(indicator(a.b) - a.records[1].p_true);
  EXPECT_LT(std::abs(gap.mean()), 4 * gap.standard_error());
}

TEST(Simulate, RneLawMakesRneBeliefMartingale) {
  auto c = small_config(20000);
  c.outcome_law = OutcomeLaw::rne;
  const auto p = simulate_market(c, 8);
  stats::MeanAccumulator d;
  for (const auto& a : p.assets) d.add(a.records[1].Pi - c.rne_prior(a.sign_change));
  EXPECT_LT(std::abs(d.mean()), 4 * d.standard_error());
}

TEST(Panel, RecordIndex) {
  const auto p = simulate_market(small_config(10), 1);
  EXPECT_EQ(p.record_index(2.5), 1u);
  EXPECT_THROW(p.record_index(2.0), InputError);
}

TEST(Cohorts, CountsAndMix) {
  const auto p = simulate_market(small_config(5000), 9);
  std::size_t total = 0;
  for (CurveKind k : {CurveKind::momentum_plus, CurveKind::momentum_minus}) {
    const auto c = sort_cohorts(p, 2.5, {}, k);
    EXPECT_EQ(c.points.size(), 50u);
    for (const auto& pt : c.points) total += static_cast<std::size_t>(pt.weight);
  }
  EXPECT_EQ(total, 5000u);

  const auto vc = sort_cohorts(p, 2.5, {}, CurveKind::volatility);
  ASSERT_EQ(vc.points.size(), 25u);
  std::size_t vtotal = 0;
  for (const auto& pt : vc.points) {
    vtotal += pt.n_plus + pt.n_minus;
    EXPECT_EQ(static_cast<std::size_t>(pt.weight), pt.n_plus + pt.n_minus);
    if (pt.n_minus > 0) EXPECT_DOUBLE_EQ(pt.mix_ratio, double(pt.n_plus) / double(pt.n_minus));
    EXPECT_LE(pt.hi, 0.5 + 1e-15);
  }
  EXPECT_EQ(vtotal, 5000u);
}

TEST(Cohorts, ExplicitEdgesAndQuantiles) {
  const auto p = simulate_market(small_config(3000), 10);
  Binning e;
  e.mode = Binning::Mode::edges;
  e.edges = {0.0, 0.1, 0.3, 0.5};
  const auto c = sort_cohorts(p, 2.5, e, CurveKind::volatility);
  ASSERT_EQ(c.points.size(), 3u);
  EXPECT_NEAR(c.points[1].v, 0.2, 1e-15);
  Binning q;
  q.mode = Binning::Mode::quantiles;
  q.bins = 10;
  const auto cq = sort_cohorts(p, 2.5, q, CurveKind::volatility);
  ASSERT_EQ(cq.points.size(), 10u);
  for (const auto& pt : cq.points) EXPECT_NEAR(pt.weight, 300.0, 2.0);
}

TEST(ExpostExcess, MatchesManualAverage) {
  const auto p = simulate_market(small_config(5000), 11);
  const auto c = measure_expost_excess(p, 2.5, sort_cohorts(p, 2.5, {}, CurveKind::volatility));
  const auto& bin = c.points[3];
  stats::MeanAccumulator m;
  for (const auto& a : p.assets) {
    const auto& r = a.records[1];
    const double v = std::min(r.Pi, 1 - r.Pi);
    if (v < bin.lo || v >= bin.hi) continue;
    m.add(a.sign_change * (indicator(a.b) - r.Pi) * 1.0);
  }
  ASSERT_EQ(m.count(), static_cast<std::size_t>(bin.weight));
  EXPECT_NEAR(bin.rp, m.mean(), 1e-12);
  EXPECT_NEAR(bin.se, m.standard_error(), 1e-12);
}

TEST(ExpostExcess, AgreesWithClosedFormPerBin) {
  auto c = small_config(40000);
  c.record_times = {2.5};
  const auto p = simulate_market(c, 12);
  for (CurveKind k : {CurveKind::momentum_plus, CurveKind::momentum_minus}) {
    const auto cur = measure_expost_excess(p, 2.5, sort_cohorts(p, 2.5, {}, k));
    for (const auto& pt : cur.points) {
      if (pt.weight < 500) continue;
      EXPECT_LT(std::abs(pt.rp - pt.rp_model), 4.0 * pt.se) << kind_name(k) << " v=" << pt.v;
    }
  }
}

TEST(ExpostDecomposition, PartsReconcileExactly) {
  const auto p = simulate_market(small_config(5000), 13);
  const auto d = expost_decomposition(p, 2.5);
  for (const auto* g : {&d.plus, &d.minus, &d.pooled})
    EXPECT_NEAR(g->total.mean, g->priced.mean + g->bias.mean + g->residual.mean, 1e-12);
  EXPECT_EQ(d.plus.n + d.minus.n, d.pooled.n);
  EXPECT_GT(d.plus.priced.mean, 0.0);
  EXPECT_GT(d.plus.bias.mean, 0.0);
}
