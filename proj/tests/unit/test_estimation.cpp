#include <gtest/gtest.h>

#include <cmath>

#include "rnelab/anomaly.hpp"
#include "rnelab/estimation.hpp"

using namespace rnelab;
using namespace rnelab::estimation;

namespace {

CohortCurve curve_from(CurveKind kind, const std::function<double(double)>& f, double lo, double hi,
                       std::size_t n, double se = 0.0) {
  CohortCurve c;
  c.kind = kind;
  for (std::size_t i = 0; i < n; ++i) {
    CurvePoint p;
    p.v = lo + (hi - lo) * (i + 0.5) / n;
    p.rp = f(p.v);
    p.weight = 1.0;
    p.se = se;
    c.points.push_back(p);
  }
  return c;
}

}  // namespace

TEST(RecoverParams, InvertsLowRiskPeak) {
  const auto r = recover_params(0.1, 0.1, 1.0);
  EXPECT_NEAR(r.rho_hat, 9.0, 1e-12);
  EXPECT_NEAR(r.K_hat, 1.5, 1e-12);
  for (double rho : {1.0, 2.0, 30.0})
    for (double K : {1.0, 1.3, 4.0}) {
      const auto p = anomaly::lowrisk_peak(rho, K, 2.0);
      const auto q = recover_params(p.v_max, p.rp_max, 2.0);
      EXPECT_NEAR(q.rho_hat, rho, 1e-12 * rho);
      EXPECT_NEAR(q.K_hat, K, 1e-12 * K);
    }
}

TEST(RecoverParams, Domain) {
  EXPECT_THROW(recover_params(0.0, 0.1, 1.0), InputError);
  EXPECT_THROW(recover_params(0.6, 0.1, 1.0), InputError);
  EXPECT_THROW(recover_params(0.1, 0.5, 1.0), OutOfModelError);
  EXPECT_THROW(recover_params(0.1, -0.5, 1.0), OutOfModelError);
  EXPECT_LT(recover_params(0.1, -0.05, 1.0).K_hat, 1.0);
  EXPECT_NEAR(recover_params(0.5, 0.0, 1.0).rho_hat, 1.0, 1e-15);
}

TEST(FindPeak, MomentumCurveMatchesClosedForm) {
  anomaly::AnomalyParams ap;
  const auto c = anomaly::momentum_curve(ap, +1, 200);
  const auto f = find_peak(c);
  const auto want = anomaly::momentum_peak(ap.rho, ap.K, ap.S_delta, +1);
  EXPECT_NEAR(f.v_max, want.v_max, 1e-3);
  EXPECT_NEAR(f.rp_max, want.rp_max, 1e-4);
  EXPECT_TRUE(f.quadratic_used);
}

TEST(FindPeak, VolatilityPeakAtOneHalf) {
  anomaly::AnomalyParams ap;
  ap.rho = 1.0;
  const auto f = find_peak(anomaly::vol_curve(ap, 100));
  EXPECT_NEAR(f.v_max, 0.5, 1e-6);
  EXPECT_NEAR(f.rp_max, 0.1, 1e-4);
}

TEST(FindPeak, QuadraticVertexBetweenGridPoints) {
  const auto c = curve_from(CurveKind::volatility, [](double v) { return 0.1 - 3.0 * (v - 0.1234) * (v - 0.1234); },
                            0.0, 0.5, 25);
  const auto f = find_peak(c);
  EXPECT_NEAR(f.v_max, 0.1234, 1e-9);
  EXPECT_NEAR(f.rp_max, 0.1, 1e-12);
}

TEST(FindPeak, RejectsBadShapes) {
  EXPECT_THROW(find_peak(curve_from(CurveKind::momentum_plus, [](double) { return 0.2; }, 0, 1, 20)), ShapeError);
  EXPECT_THROW(find_peak(curve_from(CurveKind::momentum_plus, [](double v) { return v; }, 0, 1, 20)), ShapeError);
  EXPECT_THROW(find_peak(curve_from(CurveKind::momentum_plus,
                                    [](double v) { return std::sin(4 * M_PI * v); }, 0, 1, 40)),
               ShapeError);
  EXPECT_THROW(find_peak(curve_from(CurveKind::momentum_plus, [](double v) { return v; }, 0, 1, 3)), ShapeError);
}

TEST(FindPeak, ToleratesHumpsWithinNoise) {
  // a 0.01 ripple is insignificant at se = 0.05
  auto f = [](double v) { return 0.2 - (v - 0.2) * (v - 0.2) + 0.01 * std::sin(40 * v); };
  const auto noisy = curve_from(CurveKind::volatility, f, 0.0, 0.5, 25, 0.05);
  EXPECT_NO_THROW(find_peak(noisy));
  const auto exact = curve_from(CurveKind::volatility, f, 0.0, 0.5, 25);
  EXPECT_THROW(find_peak(exact), ShapeError);
}

TEST(FindPeak, SkipsLightBins) {
  auto c = curve_from(CurveKind::volatility, [](double v) { return -(v - 0.2) * (v - 0.2); }, 0.0, 0.5, 25);
  for (auto& p : c.points) p.weight = 100.0;
  c.points[24].rp = 10.0;
  c.points[24].weight = 10.0;
  PeakOptions o;
  o.min_weight = 50.0;
  EXPECT_NEAR(find_peak(c, o).v_max, 0.2, 1e-9);
}

TEST(Roundtrip, ReproducibleAcrossThreads) {
  market::MarketConfig c;
  c.n_assets = 20000;
  c.truth = {0.49, 9.0};
  c.inference.dt = 0.05;
  c.inference.t_max = 2.5;
  RoundtripOptions o;
  o.bootstrap = 20;
  c.threads = 1;
  const auto a = roundtrip(c, 99, o);
  c.threads = 4;
  const auto b = roundtrip(c, 99, o);
  EXPECT_EQ(a.estimate.K_hat, b.estimate.K_hat);
  EXPECT_EQ(a.estimate.rho_ci.lo, b.estimate.rho_ci.lo);
  EXPECT_EQ(a.estimate.K_ci.hi, b.estimate.K_ci.hi);
  EXPECT_EQ(a.estimate.bootstrap_ok + a.estimate.bootstrap_failed, 20u);
  EXPECT_LE(a.estimate.K_ci.lo, a.estimate.K_ci.hi);
  EXPECT_TRUE(a.estimate.in_window);
  EXPECT_FALSE(format_report(a).empty());
}

TEST(Roundtrip, NoModelRiskMeansNoPremium) {
  // K = 1 and rho = 1: beliefs are the truth and Pi = pi, so no bin earns an excess
  market::MarketConfig c;
  c.n_assets = 40000;
  c.truth = {0.49, 1.0};
  c.pricing.K = 1.0;
  c.inference.dt = 0.05;
  c.inference.t_max = 2.5;
  const auto panel = market::simulate_market(c, 5);
  const auto cur = market::measure_expost_excess(panel, 2.5, market::sort_cohorts(panel, 2.5, {}, CurveKind::volatility));
  for (const auto& p : cur.points)
    if (p.weight >= 200) EXPECT_LT(std::abs(p.rp), 4.0 * p.se) << "v=" << p.v;
}
