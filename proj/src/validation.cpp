#include "rnelab/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rnelab/anomaly.hpp"
#include "rnelab/estimation.hpp"
#include "rnelab/inference.hpp"
#include "rnelab/io.hpp"
#include "rnelab/market.hpp"
#include "rnelab/parallel.hpp"
#include "rnelab/pricing.hpp"
#include "rnelab/rng.hpp"
#include "rnelab/stats.hpp"

namespace rnelab::validation {

bool SuiteReport::all_passed() const { return failures() == 0; }

std::size_t SuiteReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.passed; }));
}

namespace {

using inference::InferenceParams;

template <class... Args>
std::string cat(Args&&... args) {
  std::ostringstream os;
  os.precision(6);
  (os << ... << args);
  return os.str();
}

struct Ctx {
  const config::RunConfig& cfg;
  anomaly::AnomalyParams ap;
  double sigma_l;
  double t_eval;
  std::uint64_t seed;
  unsigned threads;
};

// Ensemble of belief paths with B drawn from `p_plus` on a separate stream.
std::vector<std::pair<Outcome, inference::BeliefPath>> belief_ensemble(
    const InferenceParams& ip, double prior, double p_plus, std::size_t n, std::uint64_t seed,
    unsigned threads) {
  std::vector<std::pair<Outcome, inference::BeliefPath>> out(n);
  const std::uint64_t b_seed = derive_seed(seed, 0xB0);
  parallel_for(n, threads, [&](std::size_t i) {
    GaussianStream u(b_seed, i);
    const Outcome b = u.uniform() < p_plus ? Outcome::plus : Outcome::minus;
    out[i] = {b, inference::simulate_belief_path(ip, b, prior, seed, i)};
  });
  return out;
}

CheckResult bayes_exactness(const Ctx& c) {
  InferenceParams ip = c.cfg.market.inference;
  const double prior = c.cfg.market.reference_prior();
  const auto ens = belief_ensemble(ip, prior, 0.5, 500, derive_seed(c.seed, 1), c.threads);
  double worst = 0.0;
  for (const auto& [b, path] : ens) {
    for (const auto& s : path) {
      if (std::abs(s.loglr + std::log(s.prior_odds)) >= kLogOddsLimit) continue;
      const double ratio = s.odds() / s.prior_odds;
      worst = std::max(worst, std::abs(ratio / std::exp(s.loglr) - 1.0));
    }
  }
  return {"inference_core", "bayes_exactness", worst <= 1e-12, cat("max rel err ", worst)};
}

// Stratified over B: the ensemble mean is target * E[.|plus] + (1 - target) * E[.|minus],
// which removes the outcome-draw variance from the standard error.
CheckResult martingale(const Ctx& c, bool rne) {
  InferenceParams ip = c.cfg.market.inference;
  const double prior = c.cfg.market.reference_prior();
  const double K = c.cfg.market.pricing.K;
  const double target = rne ? pricing::rne_belief(prior, K, +1) : prior;
  const std::size_t n = 4000;
  const auto n_plus = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(n * target)), 200, n - 200);
  const std::uint64_t s = derive_seed(c.seed, rne ? 3 : 2);
  const auto plus = belief_ensemble(ip, prior, 1.0, n_plus, derive_seed(s, 1), c.threads);
  const auto minus = belief_ensemble(ip, prior, 0.0, n - n_plus, derive_seed(s, 0), c.threads);
  auto value = [&](const inference::BeliefState& st) {
    return rne ? pricing::rne_belief_from_log_odds(std::log(st.prior_odds) + st.loglr, K, +1).p : st.pi;
  };
  const std::size_t steps = plus.front().second.size();
  double worst_z = 0.0;
  for (std::size_t k = 0; k < steps; k += std::max<std::size_t>(1, steps / 10)) {
    stats::MeanAccumulator ap, am;
    for (const auto& e : plus) ap.add(value(e.second[k]));
    for (const auto& e : minus) am.add(value(e.second[k]));
    const double mean = target * ap.mean() + (1 - target) * am.mean();
    const double se = std::hypot(target * ap.standard_error(), (1 - target) * am.standard_error());
    if (se > 0.0) worst_z = std::max(worst_z, std::abs(mean - target) / se);
  }
  return {rne ? "rne_pricing" : "inference_core", rne ? "rne_martingale" : "reference_martingale",
          worst_z <= 3.0, cat("max |mean - prior| / se = ", worst_z)};
}

CheckResult ks_normality(const Ctx& c) {
  InferenceParams ip = c.cfg.market.inference;
  ip.t_max = c.t_eval;
  std::vector<double> ls(10000);
  const std::uint64_t s = derive_seed(c.seed, 4);
  parallel_for(ls.size(), c.threads, [&](std::size_t i) {
    ls[i] = inference::simulate_belief_path(ip, Outcome::plus, 0.5, s, i).back().loglr;
  });
  const double var = ip.cumulative_variance(c.t_eval);
  if (var <= 0.0) return {"inference_core", "ks_normality", true, "zero variance, skipped"};
  const auto r = stats::ks_test(ls, [&](double x) { return stats::normal_cdf(x, 0.5 * var, std::sqrt(var)); });
  return {"inference_core", "ks_normality", r.p_value > 0.01, cat("D = ", r.statistic, ", p = ", r.p_value)};
}

CheckResult resolution(const Ctx& c) {
  if (c.sigma_l <= 0.0) return {"inference_core", "resolution", true, "sigma_l = 0, skipped"};
  InferenceParams ip;
  ip.sigma_lZ = 0.0;
  ip.sigma_lD = c.sigma_l;
  ip.t_max = 50.0 / (c.sigma_l * c.sigma_l);
  ip.dt = ip.t_max / 400.0;
  const double prior = c.cfg.market.reference_prior();
  const auto ens = belief_ensemble(ip, prior, 1.0, 2000, derive_seed(c.seed, 5), c.threads);
  const auto m = inference::Milestones::from(c.cfg.market.truth.p1_0, std::max(1.0, c.cfg.market.truth.rho),
                                             c.cfg.market.pricing.K, c.sigma_l);
  const std::size_t start = static_cast<std::size_t>(std::max(0.0, std::abs(m.t_p)) / ip.dt) + 1;
  double prev = -1.0;
  bool mono = true;
  double last = 0.0;
  for (std::size_t k = std::min<std::size_t>(start, 400); k <= 400; k += 20) {
    std::size_t hits = 0;
    for (const auto& [b, path] : ens)
      if (path[k].pi_complement < 0.01) ++hits;
    const double f = static_cast<double>(hits) / static_cast<double>(ens.size());
    const double se = std::sqrt(std::max(f * (1 - f), 1e-4) / static_cast<double>(ens.size()));
    if (prev >= 0.0 && f < prev - 3.0 * se) mono = false;
    prev = f;
    last = f;
  }
  return {"inference_core", "resolution", mono && last >= 0.95,
          cat("monotone ", mono, ", resolved fraction at sigma^2 t = 50: ", last)};
}

CheckResult redundancy(const Ctx&) {
  double worst = 0.0;
  for (Outcome b : {Outcome::plus, Outcome::minus})
    for (double g1 : {0.25, 0.5, 1.0}) worst = std::max(worst, inference::redundancy_ode_residual(0.3, g1, b));
  auto gap = [](double g1, double l) { return inference::redundancy_map(l, 0.0, g1, Outcome::plus) - l; };
  const bool adjacent = std::abs(gap(1.0, 100.0) - gap(1.0, 50.0)) < 1e-9 &&
                        std::abs(gap(0.5, 100.0) - gap(0.5, 50.0)) > 10.0;
  return {"inference_core", "redundancy_ode", worst < 1e-6 && adjacent,
          cat("max residual ", worst, ", only g'(0)=1 stays adjacent: ", adjacent)};
}

std::vector<CheckResult> price_paths(const Ctx& c) {
  auto pp = c.cfg.market.pricing;
  pp.pi0 = c.cfg.market.reference_prior();
  InferenceParams ip = c.cfg.market.inference;
  const std::size_t paths = 1000, steps = 1000;
  const double dt = ip.dt;
  struct Res {
    double k_err = 0, price_err = 0;
    bool fixed_sign = true, colocated = true;
  };
  std::vector<Res> res(paths);
  const std::uint64_t s = derive_seed(c.seed, 6);
  parallel_for(paths, c.threads, [&](std::size_t i) {
    GaussianStream rng(s, i);
    auto p = pp;
    p.sign_change = i % 2 ? -1 : +1;
    const Outcome b = i % 4 < 2 ? Outcome::plus : Outcome::minus;
    auto st = pricing::initial_price_state(p);
    const double target = std::pow(p.K, p.sign_change);
    const double sgn0 = st.pi - st.Pi;
    double best_k = -1, best_sd = -1;
    std::size_t arg_k = 0, arg_sd = 0;
    auto& r = res[i];
    for (std::size_t k = 0; k <= steps; ++k) {
      if (k > 0) {
        pricing::StepNoise z{rng.normal(), rng.normal()};
        st = pricing::price_sde_step(st, p, ip, b, dt, z);
      }
      const double ratio = (st.pi / st.pi_complement) / (st.Pi / st.Pi_complement);
      r.k_err = std::max(r.k_err, std::abs(ratio / target - 1.0));
      const double canon = pricing::canonical_price(st.y_minus, st.S_delta, st.Pi, st.premium_to_go, p.sign_change);
      r.price_err = std::max(r.price_err, std::abs(st.S - canon) / std::max(1.0, std::abs(st.S)));
      const double d = st.pi - st.Pi;
      if (sgn0 != 0.0 && d != 0.0 && (d > 0) != (sgn0 > 0)) r.fixed_sign = false;
      const double kp = st.k_pi(p.K), sd = std::sqrt(st.Pi * st.Pi_complement);
      if (kp > best_k) best_k = kp, arg_k = k;
      if (sd > best_sd) best_sd = sd, arg_sd = k;
    }
    r.colocated = p.K == 1.0 || arg_k == arg_sd;
  });
  Res agg;
  for (const auto& r : res) {
    agg.k_err = std::max(agg.k_err, r.k_err);
    agg.price_err = std::max(agg.price_err, r.price_err);
    agg.fixed_sign = agg.fixed_sign && r.fixed_sign;
    agg.colocated = agg.colocated && r.colocated;
  }
  return {
      {"rne_pricing", "k_conservation", agg.k_err <= 1e-12, cat("max rel dev ", agg.k_err, " over 1000 x 1000")},
      {"rne_pricing", "fixed_sign", agg.fixed_sign, "sign(pi - Pi) constant on every path"},
      {"rne_pricing", "price_consistency", agg.price_err <= 1e-12, cat("max |S - canonical| ", agg.price_err)},
      {"rne_pricing", "k_peak_colocation", agg.colocated, "argmax k_Pi == argmax sigma_Pi on every path"},
  };
}

CheckResult gain_to_loss(const Ctx& c) {
  double worst = 0.0;
  for (double K : c.cfg.analytics.K_grid) {
    const double Pi = pricing::rne_belief(0.5, K, +1);
    const double k = pricing::price_of_model_risk(Pi, K);
    worst = std::max({worst, std::abs(k - (K - 1) / (K + 1)), std::abs((1 + k) / (1 - k) - K)});
  }
  return {"rne_pricing", "gain_to_loss", worst <= 1e-12, cat("max err ", worst)};
}

CheckResult pi_drift(const Ctx& c) {
  const double sig = c.sigma_l > 0 ? c.sigma_l : 0.5;
  const double K = std::max(c.cfg.market.pricing.K, 1.2);
  const double pi = 0.3, dt = 1e-3;
  const double x0 = logit(pi);
  const double Pi = pricing::rne_belief(pi, K, +1);
  GaussianStream rng(derive_seed(c.seed, 7), 0);
  stats::MeanAccumulator acc;
  for (int i = 0; i < 200000; ++i) {
    const double z = rng.normal();
    double d = 0.0;
    for (double zz : {z, -z}) {
      for (Outcome b : {Outcome::plus, Outcome::minus}) {
        const double w = b == Outcome::plus ? pi : 1.0 - pi;
        const double l = inference::loglr_increment(b, sig, dt, zz);
        d += 0.5 * w * (pricing::rne_belief_from_log_odds(x0 + l, K, +1).p - Pi);
      }
    }
    acc.add(d / dt);
  }
  const double sPi = std::sqrt(Pi * (1 - Pi));
  const double oracle = std::pow(sPi * sig, 2) * pricing::price_of_model_risk(Pi, K) * std::sqrt(pi * (1 - pi));
  const double z = std::abs(acc.mean() - oracle) / acc.standard_error();
  return {"rne_pricing", "pi_drift", z <= 3.0 || std::abs(acc.mean() - oracle) < 2e-3 * oracle,
          cat("drift ", acc.mean(), " vs ", oracle, " (", z, " se)")};
}

CheckResult capm_expansion(const Ctx&) {
  double lo = 1e300, hi = 0.0;
  for (double K = 1.01; K <= 1.2 + 1e-12; K += 0.01) {
    const double pi = 0.5, Pi = pricing::rne_belief(pi, K, +1);
    const auto d = pricing::diffusion_price_of_risk(Pi, pi, 0.5, K, 1.0);
    const double corr = std::sqrt(pi * (1 - pi)) / std::sqrt(Pi * (1 - Pi));
    const double ratio = std::abs(d.mu_over_sigma - d.capm_approx * corr) / ((K - 1) * (K - 1));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  return {"rne_pricing", "capm_expansion", hi < 1.0 && hi < 2.0 * lo,
          cat("gap / (K-1)^2 in [", lo, ", ", hi, "]")};
}

CheckResult canonical_ode(const Ctx& c) {
  std::vector<double> grid;
  for (int i = 0; i <= 90; ++i) grid.push_back(0.05 + 0.01 * i);
  const double K = c.cfg.market.pricing.K;
  const double r_pi = pricing::verify_canonical_ode(grid, [&](double p) { return pricing::rne_belief(p, K, +1); });
  const double r_sq = pricing::verify_canonical_ode(grid, [](double p) { return p * p; });
  return {"rne_pricing", "canonical_ode", r_pi < 1e-6 && r_sq > 0.05,
          cat("Pi-map residual ", r_pi, ", quadratic residual ", r_sq)};
}

bool interior_min(const std::function<double(double)>& f, double lo, double hi, double step) {
  double a = f(lo), b = f(lo + step);
  for (double v = lo + 2 * step; v <= hi + 1e-12; v += step) {
    const double cval = f(std::min(v, hi));
    if (b < a && b < cval) return true;
    a = b;
    b = cval;
  }
  return false;
}

std::vector<CheckResult> anomaly_checks(const Ctx& c) {
  std::vector<CheckResult> out;
  const double S = c.cfg.market.pricing.S_delta;
  double worst_v = 0, worst_rp = 0;
  bool single = true;
  for (double rho : c.cfg.analytics.rho_grid) {
    for (double K : c.cfg.analytics.K_grid) {
      if (rho == 1.0 && K == 1.0) continue;
      for (int s : {+1, -1}) {
        const auto p = anomaly::momentum_peak(rho, K, S, s);
        if (std::abs(p.rp_max) < 1e-14) continue;
        // orient so the extremum is a maximum
        const double o = p.rp_max > 0 ? 1.0 : -1.0;
        auto f = [&](double v) { return o * anomaly::momentum_excess(v, s, rho, K, S); };
        const auto g = anomaly::grid_argmax(f, 1e-3, 1 - 1e-3);
        worst_v = std::max(worst_v, std::abs(g.v_max - p.v_max));
        worst_rp = std::max(worst_rp, std::abs(o * g.rp_max - p.rp_max));
        if (interior_min(f, 1e-3, 1 - 1e-3, 1e-3)) single = false;
      }
    }
  }
  out.push_back({"anomaly_analytics", "momentum_peak_agreement", worst_v <= 1e-3 && worst_rp <= 1e-3 * S,
                 cat("max |v gap| ", worst_v, ", max |rp gap| ", worst_rp)});
  out.push_back({"anomaly_analytics", "momentum_single_peak", single,
                 single ? "no interior local minimum on a 1e-3 grid" : "interior local minimum found"});

  const auto& ap = c.ap;
  auto vf = [&](double v) { return anomaly::vol_conditioned_excess(v, ap); };
  const bool vmin = interior_min(vf, 1e-3, 0.5, 1e-3);
  out.push_back({"anomaly_analytics", "vol_curve_single_peak", !vmin,
                 vmin ? "interior local minimum found on a 1e-3 grid" : "no interior local minimum"});

  const auto g = anomaly::grid_argmax(vf, 1e-3, 0.5);
  const auto lp = anomaly::lowrisk_peak(ap.rho, ap.K, S);
  if (ap.bias_dominant(c.cfg.analytics.window_M_rho)) {
    const double tol = std::max(1e-3, anomaly::lowrisk_error_scale(ap));
    const bool ok = std::abs(g.v_max - lp.v_max) <= tol &&
                    std::abs(g.rp_max - lp.rp_max) <= 0.1 * std::abs(lp.rp_max);
    out.push_back({"anomaly_analytics", "lowrisk_separation", ok,
                   cat("grid peak (", g.v_max, ", ", g.rp_max, ") vs formula (", lp.v_max, ", ", lp.rp_max,
                       "), location tolerance ", tol)});
  } else {
    out.push_back({"anomaly_analytics", "lowrisk_separation", true, "configuration not bias-dominant, skipped"});
  }

  auto ap1 = ap;
  ap1.rho = 1.0;
  auto f1 = [&](double v) { return anomaly::vol_conditioned_excess(v, ap1); };
  const auto g1 = anomaly::grid_argmax(f1, 1e-3, 0.5);
  const double exact = 0.5 * (ap.K - 1) / (ap.K + 1) * S;
  out.push_back({"anomaly_analytics", "lowrisk_exact_at_rho1",
                 std::abs(g1.v_max - 0.5) < 1e-12 && std::abs(g1.rp_max - exact) < 1e-12,
                 cat("peak (", g1.v_max, ", ", g1.rp_max, ") vs (0.5, ", exact, ")")});
  const double h = 1e-4;
  const double slope = std::abs(f1(0.5) - f1(0.5 - h)) / h;
  out.push_back({"anomaly_analytics", "label_switch_symmetry", slope < 1e-3,
                 cat("one-sided slope at 1/2: ", slope)});

  bool mono = true;
  if (ap.K > 1.0) {
    const auto m = ap.milestones();
    for (Outcome b : {Outcome::plus, Outcome::minus}) {
      double prev_m = 1e300, prev_v = 1e300;
      for (double v = 0.005; v <= 0.5 + 1e-12; v += 0.005) {
        const double mm = anomaly::momentum_mix(v, ap.t, m, std::max(ap.rho, 1 / ap.rho), ap.K, b);
        const double vm = anomaly::vol_mix(std::min(v, 0.5), ap.t, m, std::max(ap.rho, 1 / ap.rho), ap.K, b);
        if (mm >= prev_m || vm > prev_v * (1 + 1e-12)) mono = false;
        prev_m = mm;
        prev_v = vm;
      }
    }
  }
  out.push_back({"anomaly_analytics", "mix_monotonicity", mono, "momentum and volatility mixes decline in v"});
  return out;
}

std::vector<CheckResult> market_checks(const Ctx& c) {
  std::vector<CheckResult> out;
  auto mc = c.cfg.market;
  mc.threads = c.threads;
  const double t = c.t_eval;
  const double t_late = 10.0 * t;
  mc.record_times = {t, t_late};
  mc.inference.t_max = std::max(mc.inference.t_max, t_late);

  {
    auto small = mc;
    small.n_assets = std::min<std::size_t>(mc.n_assets, 2000);
    small.record_times = {t};
    small.threads = 1;
    std::ostringstream a, b;
    io::write_panel_csv(a, market::simulate_market(small, c.seed));
    small.threads = 4;
    io::write_panel_csv(b, market::simulate_market(small, c.seed));
    out.push_back({"market_sim", "determinism", a.str() == b.str(), "panel CSV identical for 1 and 4 workers"});
  }

  const auto panel = market::simulate_market(mc, c.seed);
  const std::size_t n = panel.assets.size();
  std::size_t ones = 0;
  for (const auto& a : panel.assets) ones += indicator(a.b);
  const double p = mc.truth.p1_0;
  const double z_b = (static_cast<double>(ones) - n * p) / std::sqrt(n * p * (1 - p));
  out.push_back({"market_sim", "outcome_frequency", std::abs(z_b) <= 3.0, cat("B=1 count z-score ", z_b)});

  {
    const std::size_t ri = panel.record_index(t);
    stats::MeanAccumulator xa, ya, xy;
    for (std::size_t i = 0; i + 1 < n; i += 2) {
      const double x = panel.assets[i].records[ri].Pi, y = panel.assets[i + 1].records[ri].Pi;
      xa.add(x);
      ya.add(y);
      xy.add(x * y);
    }
    const double cov = xy.mean() - xa.mean() * ya.mean();
    const double corr = cov / std::sqrt(xa.variance() * ya.variance());
    const double pairs = static_cast<double>(xa.count());
    out.push_back({"market_sim", "independence", std::abs(corr) <= 3.0 / std::sqrt(pairs),
                   cat("corr ", corr, " over ", pairs, " pairs")});
  }

  {
    std::size_t used = 0, bad = 0;
    for (CurveKind k : {CurveKind::momentum_plus, CurveKind::momentum_minus}) {
      const auto cur = market::measure_expost_excess(panel, t, market::sort_cohorts(panel, t, {}, k));
      for (const auto& pt : cur.points) {
        if (pt.weight < 200) continue;
        ++used;
        if (std::abs(pt.rp - pt.rp_model) > 3.0 * pt.se) ++bad;
      }
    }
    out.push_back({"market_sim", "momentum_agreement", used > 0 && bad == 0,
                   cat(bad, " of ", used, " bins with n >= 200 outside 3 se")});
  }

  {
    const auto early = market::sort_cohorts(panel, t, {}, CurveKind::volatility).points.back();
    const auto late = market::sort_cohorts(panel, t_late, {}, CurveKind::volatility).points.back();
    const auto m = c.ap.milestones();
    const double target = std::pow(std::max(c.ap.rho, 1 / c.ap.rho), -m.t_K / t);
    const bool ok = early.mix_ratio < 1.0 && std::abs(early.mix_ratio - target) <= 3.0 * early.mix_se &&
                    std::abs(late.mix_ratio - 1.0) < std::abs(early.mix_ratio - 1.0);
    out.push_back({"market_sim", "volatility_mix_association", ok,
                   cat("top bin mix ", early.mix_ratio, " +- ", early.mix_se, " vs ", target, "; at t=", t_late,
                       ": ", late.mix_ratio)});
  }

  {
    const auto d = market::expost_decomposition(panel, t);
    bool ok = true;
    for (const auto* g : {&d.plus, &d.minus, &d.pooled})
      ok = ok && std::abs(g->residual.mean) <= 3.0 * g->residual.se;
    if (mc.truth.rho > 1.0 && mc.pricing.K > 1.0) ok = ok && d.plus.priced.mean > 0 && d.plus.bias.mean > 0;
    out.push_back({"market_sim", "expost_decomposition", ok,
                   cat("pooled total ", d.pooled.total.mean, " = priced ", d.pooled.priced.mean, " + bias ",
                       d.pooled.bias.mean, " + residual ", d.pooled.residual.mean, " (se ", d.pooled.residual.se, ")")});
  }

  try {
    estimation::RoundtripOptions o;
    o.t = t;
    o.binning = c.cfg.binning();
    o.n_min = c.cfg.estimation.n_min;
    o.bootstrap = std::min<std::size_t>(c.cfg.estimation.bootstrap, 50);
    const auto rep = estimation::estimate_panel(panel, o);
    const auto& e = rep.estimate;
    const bool ok = std::abs(e.K_hat - mc.pricing.K) <= 0.1 * mc.pricing.K &&
                    std::abs(e.rho_hat - mc.truth.rho) <= 0.2 * mc.truth.rho;
    out.push_back({"estimation", "roundtrip_accuracy", ok,
                   cat("K_hat ", e.K_hat, " (true ", mc.pricing.K, "), rho_hat ", e.rho_hat, " (true ", mc.truth.rho, ")")});
  } catch (const std::exception& e) {
    out.push_back({"estimation", "roundtrip_accuracy", false, cat("error: ", e.what())});
  }
  return out;
}

std::vector<CheckResult> estimation_checks(const Ctx& c) {
  double worst = 0.0;
  bool mono = true;
  for (double rho = 1.0; rho <= 50.0; rho *= 1.7) {
    for (double K = 1.0; K < 2.0; K += 0.1) {
      const auto lp = anomaly::lowrisk_peak(rho, K, 1.0);
      const auto r = estimation::recover_params(lp.v_max, lp.rp_max, 1.0);
      worst = std::max({worst, std::abs(r.rho_hat - rho) / rho, std::abs(r.K_hat - K) / K});
    }
  }
  double prev_rho = 1e300, prev_K = -1e300;
  for (double v = 0.01; v <= 0.5; v += 0.01) {
    const double r = estimation::recover_params(v, 0.0, 1.0).rho_hat;
    if (!(r < prev_rho)) mono = false;
    prev_rho = r;
  }
  for (double rp = 0.0; rp < 0.49; rp += 0.01) {
    const double k = estimation::recover_params(0.1, rp, 1.0).K_hat;
    if (!(k > prev_K)) mono = false;
    prev_K = k;
  }
  (void)c;
  return {{"estimation", "recover_inverts_lowrisk", worst < 1e-12, cat("max rel err ", worst)},
          {"estimation", "recover_monotone", mono, "rho_hat decreasing in v_max, K_hat increasing in rp_max"}};
}

CheckResult config_roundtrip(const Ctx& c) {
  const std::string a = config::echo_config(c.cfg);
  const std::string b = config::echo_config(config::parse_config(a));
  return {"cli_io", "config_echo_fixed_point", a == b, "parse(echo(cfg)) echoes identically"};
}

}  // namespace

SuiteReport run_invariant_suite(const config::RunConfig& cfg,
                                const std::function<void(const CheckResult&)>& progress) {
  cfg.validate();
  const auto ap = cfg.anomaly_params();
  Ctx c{cfg, ap, ap.sigma_l, cfg.analytics.eval_time, cfg.run.seed, cfg.run.threads};
  SuiteReport rep;
  auto add = [&](CheckResult r) {
    if (progress) progress(r);
    rep.checks.push_back(std::move(r));
  };
  auto add_all = [&](std::vector<CheckResult> rs) {
    for (auto& r : rs) add(std::move(r));
  };
  add(bayes_exactness(c));
  add(martingale(c, false));
  add(ks_normality(c));
  add(resolution(c));
  add(redundancy(c));
  add_all(price_paths(c));
  add(martingale(c, true));
  add(gain_to_loss(c));
  add(pi_drift(c));
  add(capm_expansion(c));
  add(canonical_ode(c));
  add_all(anomaly_checks(c));
  add_all(estimation_checks(c));
  add_all(market_checks(c));
  add(config_roundtrip(c));
  return rep;
}

}  // namespace rnelab::validation
