#include "rnelab/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rnelab/rng.hpp"

namespace rnelab::inference {

void InferenceParams::validate() const {
  require(std::isfinite(sigma_lZ) && sigma_lZ >= 0.0, "sigma_lZ must be finite and >= 0");
  require(std::isfinite(sigma_lD) && sigma_lD >= 0.0, "sigma_lD must be finite and >= 0");
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require(std::isfinite(t_max) && t_max >= dt, "t_max must be >= dt");
  std::vector<ScheduleSegment> sorted = schedule;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.t_begin < b.t_begin; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const auto& s = sorted[i];
    require(s.t_begin >= 0.0 && s.t_end > s.t_begin, "schedule segment needs 0 <= t_begin < t_end");
    require(s.sigma_lZ >= 0.0 && s.sigma_lD >= 0.0 && std::isfinite(s.sigma_lZ) &&
                std::isfinite(s.sigma_lD),
            "schedule segment rates must be finite and >= 0");
    if (i > 0) require(sorted[i - 1].t_end <= s.t_begin, "schedule segments overlap");
  }
}

const ScheduleSegment* InferenceParams::segment_at(double t) const {
  for (const auto& s : schedule)
    if (t >= s.t_begin && t < s.t_end) return &s;
  return nullptr;
}

double InferenceParams::sigma_lZ_at(double t) const {
  const auto* s = segment_at(t);
  return s ? s->sigma_lZ : sigma_lZ;
}

double InferenceParams::sigma_lD_at(double t) const {
  const auto* s = segment_at(t);
  return s ? s->sigma_lD : sigma_lD;
}

double InferenceParams::sigma_l_at(double t) const {
  return std::hypot(sigma_lZ_at(t), sigma_lD_at(t));
}

std::pair<double, double> InferenceParams::cumulative_variance_split(double t) const {
  if (t <= 0.0) return {0.0, 0.0};
  // Base rates over [0, t], then swap in each override's rates on its overlap.
  double vz = sigma_lZ * sigma_lZ * t;
  double vd = sigma_lD * sigma_lD * t;
  for (const auto& s : schedule) {
    const double lo = std::min(s.t_begin, t);
    const double hi = std::min(s.t_end, t);
    const double len = hi - lo;
    if (len <= 0.0) continue;
    vz += (s.sigma_lZ * s.sigma_lZ - sigma_lZ * sigma_lZ) * len;
    vd += (s.sigma_lD * s.sigma_lD - sigma_lD * sigma_lD) * len;
  }
  return {std::max(vz, 0.0), std::max(vd, 0.0)};
}

double InferenceParams::cumulative_variance(double t) const {
  const auto [vz, vd] = cumulative_variance_split(t);
  return vz + vd;
}

std::size_t InferenceParams::steps() const {
  return static_cast<std::size_t>(std::llround(std::ceil(t_max / dt - 1e-9)));
}

double loglr_increment(Outcome b, double sigma_l, double dt, double gauss_noise) {
  require_finite(sigma_l, "sigma_l");
  require_finite(dt, "dt");
  require_finite(gauss_noise, "gauss_noise");
  require(sigma_l >= 0.0, "sigma_l must be >= 0");
  require(dt > 0.0, "dt must be > 0");
  const double var = sigma_l * sigma_l * dt;
  return drift_sign(b) * 0.5 * var + sigma_l * std::sqrt(dt) * gauss_noise;
}

Probability posterior_probability(double prior_odds, double loglr) {
  require(prior_odds > 0.0 && std::isfinite(prior_odds), "prior_odds must be positive and finite");
  require(!std::isnan(loglr), "loglr must not be NaN");
  return Probability::from_log_odds(std::log(prior_odds) + clamp_log_odds(loglr));
}

double posterior_from_loglr(double prior_odds, double loglr) {
  return posterior_probability(prior_odds, loglr).p;
}

BeliefPath simulate_belief_path(const InferenceParams& params, Outcome b, double prior,
                                std::uint64_t seed, std::uint64_t path_index) {
  params.validate();
  require_probability(prior, "prior");
  const double prior_odds = odds_for(prior);
  const std::size_t n = params.steps();
  GaussianStream rng(seed, path_index);

  BeliefPath path;
  path.reserve(n + 1);
  double l = 0.0;
  double t = 0.0;
  double v_prev = 0.0;
  auto push = [&](double time) {
    const auto p = posterior_probability(prior_odds, l);
    path.push_back({time, l, p.p, p.complement, prior_odds});
  };
  push(0.0);
  for (std::size_t i = 1; i <= n; ++i) {
    t = std::min(params.t_max, static_cast<double>(i) * params.dt);
    const double v = params.cumulative_variance(t);
    const double dv = std::max(v - v_prev, 0.0);
    v_prev = v;
    // Piecewise-constant rates: the step's increment is N(+-dv/2, dv) exactly.
    l += drift_sign(b) * 0.5 * dv + std::sqrt(dv) * rng.normal();
    push(t);
  }
  return path;
}

ResolutionDiagnostic resolution_diagnostic(const InferenceParams& params, double t) {
  params.validate();
  require(t >= 0.0 && t <= params.t_max, "t must lie in [0, t_max]");
  ResolutionDiagnostic out;
  out.cumulative_variance = params.cumulative_variance(t);
  double tail_start = t;
  for (const auto& s : params.schedule) {
    if (std::isfinite(s.t_end)) tail_start = std::max(tail_start, s.t_end);
  }
  out.resolving = params.sigma_l_at(tail_start) > 0.0;
  return out;
}

Milestones Milestones::from(double p1_0, double rho, double K, double sigma_l) {
  require_probability(p1_0, "p1_0");
  require(rho >= 1.0 && std::isfinite(rho), "rho must be >= 1 (label-switch first)");
  require(K >= 1.0 && std::isfinite(K), "K must be >= 1");
  require(sigma_l > 0.0 && std::isfinite(sigma_l), "sigma_l must be > 0");
  Milestones m;
  m.H_p = -logit(p1_0);
  m.H_Pi_plus = m.H_p + std::log(rho * K);
  m.H_Pi_minus = m.H_p + std::log(rho / K);
  const double var = sigma_l * sigma_l;
  m.t_p = 2.0 * m.H_p / var;
  m.t_rho = 2.0 * std::log(rho) / var;
  m.t_K = 2.0 * std::log(K) / var;
  return m;
}

double certainty_tracker(double t, const Milestones& m, Outcome b, double sigma_l,
                         CertaintyTarget target) {
  require(t > 0.0 && std::isfinite(t), "t must be > 0");
  double hurdle_time = m.t_p;
  if (target == CertaintyTarget::rne_plus) hurdle_time = m.t_Pi_plus();
  if (target == CertaintyTarget::rne_minus) hurdle_time = m.t_Pi_minus();
  return 0.5 * sigma_l * std::sqrt(t) * (parity(b) + hurdle_time / t);
}

bool window_check(double t, const Milestones& m, double eps_p, double M_rho) {
  require(t > 0.0, "t must be > 0");
  require(eps_p > 0.0 && eps_p < 1.0, "eps_p must lie in (0, 1)");
  require(M_rho > 1.0, "M_rho must be > 1");
  return m.t_p / t <= eps_p && m.t_rho / t >= M_rho;
}

double event_dominance_loglr(double t, double u, const Milestones& m, double sigma_l,
                             Branch branch, Outcome b) {
  require(t > 0.0 && u > 0.0, "t and u must be > 0");
  const double sgn = branch == Branch::plus ? 1.0 : -1.0;
  if (branch == Branch::minus) require(u < t, "minus branch needs u < t");
  const double c_now = certainty_tracker(t, m, b, sigma_l, CertaintyTarget::objective);
  const double c_other = certainty_tracker(t + sgn * u, m, b, sigma_l, CertaintyTarget::objective);
  return std::log1p(sgn * u / t) + c_other * c_other - c_now * c_now;
}

double redundancy_map(double l, double g0, double g1, Outcome b) {
  require(g1 > 0.0 && g1 <= 1.0, "g'(0) must lie in (0, 1]");
  // log(g1 e^{x} + 1 - g1) without cancellation or overflow
  auto lse = [g1](double x) {
    const double a = std::log(g1) + x;
    if (g1 == 1.0) return a;
    const double c = std::log1p(-g1);
    const double hi = std::max(a, c);
    return hi + std::log1p(std::exp(std::min(a, c) - hi));
  };
  if (b == Outcome::plus) return g0 - lse(-l);
  return g0 + lse(l);
}

double redundancy_ode_residual(double g0, double g1, Outcome b, double l_lo, double l_hi,
                               double h) {
  require(l_hi > l_lo && h > 0.0, "bad residual grid");
  const double s = b == Outcome::plus ? -1.0 : 1.0;
  const auto n = static_cast<std::size_t>(std::ceil((l_hi - l_lo) / 0.01));
  double worst = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double l = l_lo + (l_hi - l_lo) * static_cast<double>(i) / static_cast<double>(n);
    const double lo = redundancy_map(l - h, g0, g1, b);
    const double mid = redundancy_map(l, g0, g1, b);
    const double hi = redundancy_map(l + h, g0, g1, b);
    const double d1 = (hi - lo) / (2.0 * h);
    const double d2 = (hi - 2.0 * mid + lo) / (h * h);
    worst = std::max(worst, std::abs(d2 + s * (d1 - 1.0) * d1));
  }
  return worst;
}

}  // namespace rnelab::inference
