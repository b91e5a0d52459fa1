#include "rnelab/anomaly.hpp"

#include <algorithm>
#include <cmath>

#include "rnelab/stats.hpp"

namespace rnelab::anomaly {

namespace {

void require_sign(int s) { require(s == 1 || s == -1, "sign_change must be +1 or -1"); }

void require_rho_K(double rho, double K) {
  require(std::isfinite(rho) && rho > 0.0, "rho must be > 0");
  require(std::isfinite(K) && K >= 1.0, "K must be >= 1");
}

}  // namespace

void AnomalyParams::validate() const {
  require_rho_K(rho, K);
  require(std::isfinite(S_delta) && S_delta > 0.0, "S_delta must be > 0");
  require_finite(H_p, "H_p");
  require(std::isfinite(sigma_l) && sigma_l > 0.0, "sigma_l must be > 0");
  require(std::isfinite(t) && t > 0.0, "t must be > 0");
}

double AnomalyParams::p1_0() const { return logistic(-H_p); }

inference::Milestones AnomalyParams::milestones() const {
  validate();
  if (rho >= 1.0) return inference::Milestones::from(p1_0(), rho, K, sigma_l);
  // Label switching: swap the outcomes so the bias parameter exceeds 1.
  return inference::Milestones::from(1.0 - p1_0(), 1.0 / rho, K, sigma_l);
}

double AnomalyParams::tp_over_t() const { return milestones().t_p / t; }
double AnomalyParams::trho_over_t() const { return milestones().t_rho / t; }
double AnomalyParams::tK_over_t() const { return milestones().t_K / t; }

bool AnomalyParams::bias_dominant(double M_rho) const { return trho_over_t() >= M_rho; }
bool AnomalyParams::objective_dominated(double eps_p) const { return tp_over_t() <= eps_p; }
bool AnomalyParams::in_window(double eps_p, double M_rho) const {
  return inference::window_check(t, milestones(), eps_p, M_rho);
}

double momentum_excess(double v, int sign_change, double rho, double K, double S_delta) {
  require_probability(v, "v");
  require_sign(sign_change);
  require_rho_K(rho, K);
  const double inv_a = 1.0 / (rho * std::pow(K, sign_change));
  const double w = 1.0 - v;
  return sign_change * v * w * (1.0 - inv_a) / (v + w * inv_a) * S_delta;
}

Peak momentum_peak(double rho, double K, double S_delta, int sign_change) {
  require_sign(sign_change);
  require_rho_K(rho, K);
  const double ra = std::sqrt(rho * std::pow(K, sign_change));
  return {1.0 / (ra + 1.0), sign_change * (ra - 1.0) / (ra + 1.0) * S_delta};
}

double pair_trade_peak(double rho, double K, double S_delta) {
  return 0.5 * (momentum_peak(rho, K, S_delta, +1).rp_max -
                momentum_peak(rho, K, S_delta, -1).rp_max);
}

double event_likelihood_ratio(double v, double t, const inference::Milestones& m,
                              int sign_change, Outcome b) {
  require(v > 0.0 && v <= 0.5, "v must lie in (0, 1/2]");
  require(t > 0.0, "t must be > 0");
  require_sign(sign_change);
  const double t_Pi = sign_change > 0 ? m.t_Pi_plus() : m.t_Pi_minus();
  const double expo = -t_Pi / t - parity(b);
  return std::exp(expo * std::log((1.0 - v) / v));
}

double momentum_mix(double v, double t, const inference::Milestones& m, double rho, double K,
                    Outcome b) {
  require_probability(v, "v");
  require(t > 0.0, "t must be > 0");
  require_rho_K(rho, K);
  const double log_m = -(m.t_K / t) * std::log(rho * v / (1.0 - v)) +
                       (-(m.t_p / t) - parity(b)) * std::log(K);
  return std::exp(log_m);
}

double vol_mix(double v, double t, const inference::Milestones& m, double rho, double K,
               Outcome b) {
  const double M = momentum_mix(v, t, m, rho, K, b);
  const double r_plus = event_likelihood_ratio(v, t, m, +1, b);
  const double r_minus = event_likelihood_ratio(v, t, m, -1, b);
  return M * (1.0 + r_plus) / (1.0 + r_minus);
}

double belief_density(double u, int sign_change, const AnomalyParams& params) {
  require_probability(u, "u");
  require_sign(sign_change);
  params.validate();
  const double var = params.sigma_l * params.sigma_l * params.t;
  const double sd = std::sqrt(var);
  // Log-LR that puts Pi^1_t at u given this sign's RNE prior.
  const double l = logit(u) + params.H_p + std::log(params.rho) +
                   sign_change * std::log(params.K);
  const double p = params.p1_0();
  const double dens = p * stats::normal_pdf(l, 0.5 * var, sd) +
                      (1.0 - p) * stats::normal_pdf(l, -0.5 * var, sd);
  return 0.5 * dens / (u * (1.0 - u));
}

double vol_conditioned_excess(double v, const AnomalyParams& params) {
  require(v > 0.0 && v <= 0.5, "v must lie in (0, 1/2]");
  double num = 0.0;
  double den = 0.0;
  for (int s : {+1, -1}) {
    for (double u : {v, 1.0 - v}) {
      const double w = belief_density(u, s, params);
      num += w * momentum_excess(u, s, params.rho, params.K, params.S_delta);
      den += w;
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

double vol_excess_equal_mix(double v, const AnomalyParams& params) {
  require(v > 0.0 && v <= 0.5, "v must lie in (0, 1/2]");
  params.validate();
  return 0.5 * (momentum_excess(v, +1, params.rho, params.K, params.S_delta) +
                momentum_excess(v, -1, params.rho, params.K, params.S_delta));
}

Peak lowrisk_peak(double rho, double K, double S_delta) {
  require_rho_K(rho, K);
  const double r = std::max(rho, 1.0 / rho);
  return {1.0 / (r + 1.0), 0.5 * (K - 1.0) / (K + 1.0) * S_delta};
}

double lowrisk_error_scale(const AnomalyParams& params) {
  params.validate();
  return (params.K - 1.0) * std::abs(params.H_p) / (params.sigma_l * params.sigma_l * params.t);
}

Peak grid_argmax(const std::function<double(double)>& f, double lo, double hi, double step,
                 double fine) {
  require(hi > lo && step > 0.0 && fine > 0.0, "bad grid");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  Peak best{lo, f(lo)};
  for (std::size_t i = 1; i <= n; ++i) {
    const double v = std::min(lo + static_cast<double>(i) * step, hi);
    const double y = f(v);
    if (y > best.rp_max) best = {v, y};
  }
  const double a = std::max(lo, best.v_max - step);
  const double b = std::min(hi, best.v_max + step);
  const auto m = static_cast<std::size_t>(std::floor((b - a) / fine + 1e-9));
  for (std::size_t i = 0; i <= m; ++i) {
    const double v = std::min(a + static_cast<double>(i) * fine, b);
    const double y = f(v);
    if (y > best.rp_max) best = {v, y};
  }
  return best;
}

CohortCurve momentum_curve(const AnomalyParams& params, int sign_change, std::size_t points) {
  require(points >= 2, "need at least two grid points");
  params.validate();
  CohortCurve c;
  c.kind = sign_change > 0 ? CurveKind::momentum_plus : CurveKind::momentum_minus;
  c.t = params.t;
  for (std::size_t i = 0; i < points; ++i) {
    const double v = (static_cast<double>(i) + 0.5) / static_cast<double>(points);
    CurvePoint pt;
    pt.v = v;
    pt.rp = momentum_excess(v, sign_change, params.rho, params.K, params.S_delta);
    pt.rp_model = pt.rp;
    pt.weight = belief_density(v, sign_change, params);
    c.points.push_back(pt);
  }
  return c;
}

CohortCurve vol_curve(const AnomalyParams& params, std::size_t points) {
  require(points >= 2, "need at least two grid points");
  params.validate();
  CohortCurve c;
  c.kind = CurveKind::volatility;
  c.t = params.t;
  for (std::size_t i = 1; i <= points; ++i) {
    const double v = 0.5 * static_cast<double>(i) / static_cast<double>(points);
    CurvePoint pt;
    pt.v = v;
    pt.rp = vol_conditioned_excess(v, params);
    pt.rp_model = pt.rp;
    for (int s : {+1, -1}) {
      pt.weight += belief_density(v, s, params);
      if (v < 0.5) pt.weight += belief_density(1.0 - v, s, params);
    }
    c.points.push_back(pt);
  }
  return c;
}

}  // namespace rnelab::anomaly
