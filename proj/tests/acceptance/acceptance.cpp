// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "rnelab/anomaly.hpp"
#include "rnelab/estimation.hpp"
#include "rnelab/inference.hpp"
#include "rnelab/io.hpp"
#include "rnelab/market.hpp"
#include "rnelab/parallel.hpp"
#include "rnelab/pricing.hpp"
#include "rnelab/rng.hpp"
#include "rnelab/stats.hpp"

using namespace rnelab;

namespace {

constexpr std::uint64_t kSeed = 20240611;
constexpr unsigned kThreads = 4;

int g_failures = 0;

void report(int id, const char* name, bool pass, const std::string& detail) {
  std::printf("[%s] %d %s: %s\n", pass ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void info(const std::string& s) { std::printf("       %s\n", s.c_str()); }

template <class... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Default desk configuration: K = 1.5, rho = 9, p1_0 = 0.49, sigma_l = 0.5, epoch t = 2.5.
market::MarketConfig desk_market(std::size_t n, std::vector<double> record_times = {2.5}) {
  market::MarketConfig c;
  c.n_assets = n;
  c.truth = {0.49, 9.0};
  c.pricing.K = 1.5;
  c.inference.sigma_lD = 0.5;
  c.inference.dt = 0.05;
  c.inference.t_max = record_times.back();
  c.record_times = std::move(record_times);
  c.threads = kThreads;
  return c;
}

anomaly::AnomalyParams desk_params() {
  anomaly::AnomalyParams ap;
  ap.rho = 9.0;
  ap.K = 1.5;
  ap.H_p = -logit(0.49);
  ap.sigma_l = 0.5;
  ap.t = 2.5;
  return ap;
}

void k_conservation() {
  const auto t0 = std::chrono::steady_clock::now();
  inference::InferenceParams ip;
  ip.sigma_lD = 0.5;
  ip.dt = 0.01;
  const std::size_t paths = 1000, steps = 1000;
  std::vector<double> worst(paths, 0.0);
  parallel_for(paths, kThreads, [&](std::size_t i) {
    pricing::PricingParams p;
    p.K = 1.5;
    p.sign_change = i % 2 ? -1 : +1;
    p.pi0 = 0.05 + 0.9 * static_cast<double>(i) / paths;
    GaussianStream g(kSeed, i);
    auto st = pricing::initial_price_state(p);
    const Outcome b = i % 4 < 2 ? Outcome::plus : Outcome::minus;
    const double K_s = std::pow(p.K, p.sign_change);
    for (std::size_t k = 0; k < steps; ++k) {
      st = pricing::price_sde_step(st, p, ip, b, ip.dt, {g.normal(), g.normal()});
      const double ratio = (st.pi / st.pi_complement) / (st.Pi / st.Pi_complement);
      worst[i] = std::max(worst[i], std::abs(ratio / K_s - 1.0));
    }
  });
  const double w = *std::max_element(worst.begin(), worst.end());
  report(1, "K-conservation", w <= 1e-12,
         fmt("max rel deviation %.3g over 1000 paths x 1000 steps (%.2f s)", w, seconds_since(t0)));
}

void gain_to_loss() {
  double worst_k = 0, worst_g = 0;
  for (double K : {1.0, 1.2, 1.5, 1.9}) {
    const double Pi = pricing::rne_belief(0.5, K, +1);
    const double k = pricing::price_of_model_risk(Pi, K);
    worst_k = std::max(worst_k, std::abs(k - (K - 1) / (K + 1)));
    worst_g = std::max(worst_g, std::abs((1 + k) / (1 - k) - K));
  }
  report(2, "peak-risk calibration", worst_k <= 1e-12 && worst_g <= 1e-12,
         fmt("max |k - (K-1)/(K+1)| %.3g, max |gain/loss - K| %.3g", worst_k, worst_g));
}

void canonical_ode() {
  std::vector<double> grid;
  for (int i = 0; i <= 900; ++i) grid.push_back(0.05 + 0.001 * i);
  const double r_pi = pricing::verify_canonical_ode(grid, [](double p) { return pricing::rne_belief(p, 1.5, +1); });
  const double r_sq = pricing::verify_canonical_ode(grid, [](double p) { return p * p; });
  report(3, "canonical ODE", r_pi < 1e-6 && r_sq > 0.05,
         fmt("Pi-map residual %.3g, quadratic residual %.3g", r_pi, r_sq));
}

void momentum_peaks() {
  const auto t0 = std::chrono::steady_clock::now();
  struct Want {
    int s;
    double v, rp;
  };
  bool ok = true;
  std::string detail;
  for (const Want& w : {Want{+1, 0.2139, 0.5721}, Want{-1, 0.2899, -0.4202}}) {
    const double o = w.rp > 0 ? 1.0 : -1.0;
    const auto g = anomaly::grid_argmax(
        [&](double v) { return o * anomaly::momentum_excess(v, w.s, 9.0, 1.5, 1.0); }, 1e-4, 1 - 1e-4, 1e-4, 1e-6);
    const double rp = o * g.rp_max;
    ok = ok && std::abs(g.v_max - w.v) <= 1e-3 && std::abs(rp - w.rp) <= 1e-3;
    detail += fmt("%s (%.4f, %.4f) ", w.s > 0 ? "+" : "-", g.v_max, rp);
  }
  const double secs = seconds_since(t0);
  report(4, "momentum peak reproduction", ok && secs < 1.0, detail + fmt("in %.3f s", secs));
}

void lowrisk_separation() {
  const auto ap = desk_params();
  const auto g = anomaly::grid_argmax([&](double v) { return anomaly::vol_conditioned_excess(v, ap); }, 1e-3, 0.5);
  const bool in_window = ap.in_window();
  const bool sep = std::abs(g.v_max - 0.1) <= 0.02 && std::abs(g.rp_max - 0.1) <= 0.01;
  auto ap1 = ap;
  ap1.rho = 1.0;
  const auto g1 = anomaly::grid_argmax([&](double v) { return anomaly::vol_conditioned_excess(v, ap1); }, 1e-3, 0.5);
  const double exact = 0.5 * 0.5 / 2.5;
  const bool at1 = std::abs(g1.v_max - 0.5) < 1e-12 && std::abs(g1.rp_max - exact) < 1e-12;
  report(5, "low-risk separation", in_window && sep && at1,
         fmt("in-window %d; rho=9 peak (%.4f, %.4f) vs (0.1, 0.1); rho=1 peak (%.4f, %.6f) vs (0.5, %.6f)",
             in_window, g.v_max, g.rp_max, g1.v_max, g1.rp_max, exact));
  const auto e = anomaly::grid_argmax([&](double v) { return anomaly::vol_excess_equal_mix(v, ap); }, 1e-3, 0.5);
  info(fmt("equal-mix curve peak (%.4f, %.4f); error scale (K-1)|H_p|/(sigma^2 t) = %.4f", e.v_max, e.rp_max,
           anomaly::lowrisk_error_scale(ap)));
}

void analytic_mc_agreement() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto panel = market::simulate_market(desk_market(100000), kSeed);
  std::size_t used = 0, bad = 0;
  double worst_z = 0;
  for (CurveKind k : {CurveKind::momentum_plus, CurveKind::momentum_minus}) {
    const auto c = market::measure_expost_excess(panel, 2.5, market::sort_cohorts(panel, 2.5, {}, k));
    for (const auto& p : c.points) {
      if (p.weight < 200) continue;
      ++used;
      const double z = std::abs(p.rp - p.rp_model) / p.se;
      worst_z = std::max(worst_z, z);
      if (z > 3.0) ++bad;
    }
  }
  const auto vc = market::measure_expost_excess(panel, 2.5, market::sort_cohorts(panel, 2.5, {}, CurveKind::volatility));
  bool peak_ok = false;
  std::string peak;
  try {
    const auto f = estimation::find_peak(vc, {50.0, 3.0});
    peak_ok = std::abs(f.v_max - 0.1) <= 0.02;
    peak = fmt("vol peak (%.4f, %.4f)", f.v_max, f.rp_max);
  } catch (const std::exception& e) {
    peak = std::string("vol peak: ") + e.what();
  }
  report(6, "analytic/MC agreement", bad == 0 && used > 0 && peak_ok,
         fmt("%zu of %zu momentum bins (n >= 200) outside 3 se, max %.2f se; ", bad, used, worst_z) + peak +
             " vs 0.1 +- 0.02" + fmt(" (%.1f s)", seconds_since(t0)));

  // informational: empirical vol curve against the exact density-weighted curve
  const auto ap = desk_params();
  const auto g = anomaly::grid_argmax([&](double v) { return anomaly::vol_conditioned_excess(v, ap); }, 1e-3, 0.5);
  std::size_t vused = 0, vbad = 0;
  for (const auto& p : vc.points) {
    if (p.weight < 200) continue;
    ++vused;
    if (std::abs(p.rp - p.rp_model) > 3.0 * p.se) ++vbad;
  }
  info(fmt("exact vol-curve peak (%.4f, %.4f); %zu of %zu vol bins (n >= 200) outside 3 se of the bin's closed form",
           g.v_max, g.rp_max, vbad, vused));
}

void roundtrip() {
  const auto t0 = std::chrono::steady_clock::now();
  estimation::RoundtripOptions o;
  o.t = 2.5;
  o.bootstrap = 200;
  const auto r = estimation::roundtrip(desk_market(100000), kSeed, o);
  const auto& e = r.estimate;
  const bool acc = std::abs(e.K_hat - 1.5) <= 0.15 && std::abs(e.rho_hat - 9.0) <= 1.8;

  auto m1 = desk_market(100000);
  m1.pricing.K = 1.0;
  bool sep = false;
  std::string sdetail;
  try {
    const auto r1 = estimation::roundtrip(m1, kSeed + 1, o);
    sep = r1.estimate.K_hat >= 0.95 && r1.estimate.K_hat <= 1.05;
    sdetail = fmt("K=1 panel: K_hat %.4f [%.3f, %.3f]", r1.estimate.K_hat, r1.estimate.K_ci.lo, r1.estimate.K_ci.hi);
  } catch (const std::exception& ex) {
    sdetail = std::string("K=1 panel: ") + ex.what();
  }
  report(7, "round-trip estimation", acc && sep,
         fmt("K_hat %.4f [%.3f, %.3f], rho_hat %.3f [%.2f, %.2f] vs (1.5, 9); ", e.K_hat, e.K_ci.lo, e.K_ci.hi,
             e.rho_hat, e.rho_ci.lo, e.rho_ci.hi) +
             sdetail + fmt(" (%.1f s)", seconds_since(t0)));
}

// Mean of f(belief) under B ~ Bernoulli(q), stratified over B, at each checkpoint.
double worst_martingale_z(double prior, double q, bool rne, std::size_t n, std::uint64_t seed) {
  inference::InferenceParams ip;
  ip.sigma_lD = 0.5;
  ip.dt = 0.05;
  ip.t_max = 10.0;
  const auto n_plus = static_cast<std::size_t>(std::lround(n * q));
  std::vector<inference::BeliefPath> plus(n_plus), minus(n - n_plus);
  parallel_for(plus.size(), kThreads,
               [&](std::size_t i) { plus[i] = inference::simulate_belief_path(ip, Outcome::plus, prior, seed, i); });
  parallel_for(minus.size(), kThreads, [&](std::size_t i) {
    minus[i] = inference::simulate_belief_path(ip, Outcome::minus, prior, derive_seed(seed, 1), i);
  });
  auto value = [&](const inference::BeliefState& s) {
    return rne ? pricing::rne_belief_from_log_odds(std::log(s.prior_odds) + s.loglr, 1.5, +1).p : s.pi;
  };
  double worst = 0;
  for (std::size_t k = 0; k < plus.front().size(); k += 20) {
    stats::MeanAccumulator ap, am;
    for (const auto& p : plus) ap.add(value(p[k]));
    for (const auto& p : minus) am.add(value(p[k]));
    const double mean = q * ap.mean() + (1 - q) * am.mean();
    const double se = std::hypot(q * ap.standard_error(), (1 - q) * am.standard_error());
    if (se > 0) worst = std::max(worst, std::abs(mean - q) / se);
  }
  return worst;
}

void martingale_normality() {
  const double prior = desk_market(1).reference_prior();
  const double Pi0 = pricing::rne_belief(prior, 1.5, +1);
  const double z_ref = worst_martingale_z(prior, prior, false, 10000, derive_seed(kSeed, 81));
  const double z_rne = worst_martingale_z(prior, Pi0, true, 10000, derive_seed(kSeed, 82));

  inference::InferenceParams ip;
  ip.sigma_lD = 0.5;
  ip.dt = 0.05;
  ip.t_max = 2.5;
  std::vector<double> ls(10000);
  parallel_for(ls.size(), kThreads, [&](std::size_t i) {
    ls[i] = inference::simulate_belief_path(ip, Outcome::plus, prior, derive_seed(kSeed, 83), i).back().loglr;
  });
  const double V = ip.cumulative_variance(2.5);
  const auto ks = stats::ks_test(ls, [&](double x) { return stats::normal_cdf(x, V / 2, std::sqrt(V)); });
  report(8, "martingale and normality", z_ref <= 3 && z_rne <= 3 && ks.p_value > 0.01,
         fmt("reference max %.2f se, RNE max %.2f se over 11 checkpoints; KS D=%.4f p=%.3f on 10^4 paths", z_ref,
             z_rne, ks.statistic, ks.p_value));
}

void mix_association() {
  const double t_late = 25.0;
  const auto panel = market::simulate_market(desk_market(100000, {2.5, t_late}), derive_seed(kSeed, 9));
  const auto early = market::sort_cohorts(panel, 2.5, {}, CurveKind::volatility).points.back();
  const auto late = market::sort_cohorts(panel, t_late, {}, CurveKind::volatility).points.back();
  const auto m = desk_params().milestones();
  const double target = std::pow(9.0, -m.t_K / 2.5);
  const bool below = early.mix_ratio < 1.0;
  const bool near = std::abs(early.mix_ratio - target) <= 3.0 * early.mix_se;
  const bool reverts = std::abs(late.mix_ratio - 1.0) < std::abs(early.mix_ratio - 1.0);
  report(9, "negative-momentum/volatility association", below && near && reverts,
         fmt("top bin mix %.4f +- %.4f (n=%zu) vs rho^(-t_K/t) = %.4f; at t=%g: %.4f +- %.4f (n=%zu)",
             early.mix_ratio, early.mix_se, early.n_plus + early.n_minus, target, t_late, late.mix_ratio,
             late.mix_se, late.n_plus + late.n_minus));
}

std::string artifacts(unsigned threads) {
  auto c = desk_market(20000);
  c.threads = threads;
  const auto panel = market::simulate_market(c, kSeed);
  std::ostringstream os;
  io::write_panel_csv(os, panel);
  std::vector<CohortCurve> curves;
  for (CurveKind k : {CurveKind::momentum_plus, CurveKind::momentum_minus, CurveKind::volatility})
    curves.push_back(market::measure_expost_excess(panel, 2.5, market::sort_cohorts(panel, 2.5, {}, k)));
  io::write_cohort_csv(os, curves);
  estimation::RoundtripOptions o;
  o.bootstrap = 50;
  try {
    io::write_estimate_csv(os, {estimation::estimate_panel(panel, o)});
  } catch (const std::exception& e) {
    os << e.what();
  }
  return os.str();
}

void determinism() {
  const auto a = artifacts(1);
  const auto b = artifacts(4);
  const auto c = artifacts(8);
  report(10, "determinism", a == b && a == c,
         fmt("panel + cohort + estimate CSV, %zu bytes, identical for 1/4/8 workers: %s", a.size(),
             a == b && a == c ? "yes" : "no"));
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  k_conservation();
  gain_to_loss();
  canonical_ode();
  momentum_peaks();
  lowrisk_separation();
  analytic_mc_agreement();
  roundtrip();
  martingale_normality();
  mix_association();
  determinism();
  std::printf("%d of 10 criteria failed (%.1f s)\n", g_failures, seconds_since(t0));
  return g_failures == 0 ? 0 : 1;
}
