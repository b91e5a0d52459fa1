#include "rnelab/pricing.hpp"

#include <algorithm>
#include <cmath>

namespace rnelab::pricing {

namespace {

void require_K(double K) {
  require(std::isfinite(K) && K >= 1.0, "K must be >= 1");
}

void require_sign(int s) { require(s == 1 || s == -1, "sign_change must be +1 or -1"); }

}  // namespace

void PricingParams::validate() const {
  require_K(K);
  require_sign(sign_change);
  require(std::isfinite(S_delta) && S_delta > 0.0, "S_delta must be > 0");
  require_probability(pi0, "pi0");
  require(std::isfinite(bsure_premium_drift) && bsure_premium_drift >= 0.0,
          "bsure_premium_drift must be >= 0");
  require(std::isfinite(rZ_delta) && rZ_delta >= 0.0, "rZ_delta must be >= 0");
  require(std::isfinite(sigma_Z) && sigma_Z >= 0.0, "sigma_Z must be >= 0");
  require(std::isfinite(horizon) && horizon > 0.0, "horizon must be > 0");
  if (decaying_impact)
    require(S_delta - rZ_delta * horizon > 0.0, "decaying impact must stay positive before the horizon");
}

Probability rne_belief_from_log_odds(double pi_log_odds, double K, int sign_change) {
  require_K(K);
  require_sign(sign_change);
  require(!std::isnan(pi_log_odds), "log-odds must not be NaN");
  return Probability::from_log_odds(pi_log_odds - sign_change * std::log(K));
}

double rne_belief(double pi, double K, int sign_change) {
  require_probability(pi, "pi");
  return rne_belief_from_log_odds(logit(pi), K, sign_change).p;
}

double price_of_model_risk(double Pi, double K) {
  require_K(K);
  require(Pi >= 0.0 && Pi <= 1.0, "Pi must lie in [0, 1]");
  const double sk = std::sqrt(K);
  return (sk - 1.0 / sk) * std::sqrt(Pi * (1.0 - Pi));
}

double canonical_price(double y_minus, double S_delta, double Pi, double bsure_premium_to_go,
                       int sign_change) {
  require(Pi >= 0.0 && Pi <= 1.0, "Pi must lie in [0, 1]");
  require_sign(sign_change);
  return y_minus + sign_change * S_delta * Pi - bsure_premium_to_go;
}

PremiumDecomposition premium_decomposition(double pi, double A_plus, double S_delta,
                                           BSurePremia bsure_rps, std::optional<double> true_p) {
  require_probability(pi, "pi");
  require_probability(A_plus, "A_plus");
  require(S_delta > 0.0, "S_delta must be > 0");
  PremiumDecomposition d;
  d.bsure_part = pi * bsure_rps.plus + (1.0 - pi) * bsure_rps.minus;
  d.model_part = (pi - A_plus) * S_delta;
  d.total_rp = d.bsure_part + d.model_part;
  d.price_of_model_risk = (pi - A_plus) / std::sqrt(pi * (1.0 - pi));
  if (true_p) {
    require(*true_p >= 0.0 && *true_p <= 1.0, "true_p must lie in [0, 1]");
    d.expost_gap = d.model_part + (*true_p - pi) * S_delta;
  }
  return d;
}

double PriceState::k_pi(double K) const { return price_of_model_risk(Pi, K); }

PriceState initial_price_state(const PricingParams& params, double y_minus0) {
  params.validate();
  PriceState s;
  s.prior_log_odds = logit(params.pi0);
  const auto pi = Probability::from_log_odds(s.prior_log_odds);
  const auto Pi = rne_belief_from_log_odds(s.prior_log_odds, params.K, params.sign_change);
  s.pi = pi.p;
  s.pi_complement = pi.complement;
  s.Pi = Pi.p;
  s.Pi_complement = Pi.complement;
  s.y_minus = y_minus0;
  s.S_delta = params.S_delta;
  s.premium_to_go = params.bsure_premium_drift * params.horizon;
  s.S = canonical_price(s.y_minus, s.S_delta, s.Pi, s.premium_to_go, params.sign_change);
  return s;
}

PriceState price_sde_step(const PriceState& state, const PricingParams& pricing,
                          const inference::InferenceParams& inference, Outcome b, double dt,
                          StepNoise noise) {
  require(std::isfinite(dt) && dt > 0.0, "dt must be > 0");
  require_finite(noise.z_Z, "z_Z");
  require_finite(noise.z_D, "z_D");
  const double sgn = pricing.sign_change;

  const auto [vz0, vd0] = inference.cumulative_variance_split(state.t);
  const auto [vz1, vd1] = inference.cumulative_variance_split(state.t + dt);
  const double vz = std::max(vz1 - vz0, 0.0);
  const double vd = std::max(vd1 - vd0, 0.0);

  PriceState next = state;
  next.t = state.t + dt;
  // Z data move the log-LR in the direction change would move the price.
  next.loglr = state.loglr + drift_sign(b) * 0.5 * (vz + vd) + sgn * std::sqrt(vz) * noise.z_Z +
               std::sqrt(vd) * noise.z_D;
  const double x = state.prior_log_odds + clamp_log_odds(next.loglr);
  const auto pi = Probability::from_log_odds(x);
  const auto Pi = rne_belief_from_log_odds(x, pricing.K, pricing.sign_change);
  next.pi = pi.p;
  next.pi_complement = pi.complement;
  next.Pi = Pi.p;
  next.Pi_complement = Pi.complement;

  const double r = pricing.rZ_delta;
  double dy = pricing.sigma_Z * std::sqrt(dt) * noise.z_Z + sgn * indicator(b) * r * dt;
  if (pricing.decaying_impact) {
    next.S_delta = state.S_delta - r * dt;
    if (!(next.S_delta > 0.0)) throw OutOfModelError("model-risk impact decayed to zero");
  } else {
    // Constant impact: the -Pi r dt part of the model drift is carried by the anchor.
    dy -= sgn * state.Pi * r * dt;
  }
  next.y_minus = state.y_minus + dy;
  next.premium_to_go =
      pricing.bsure_premium_drift * std::max(pricing.horizon - next.t, 0.0);

  const double d_belief = sgn * (next.S_delta * next.Pi - state.S_delta * state.Pi);
  next.S = state.S + dy + d_belief - (next.premium_to_go - state.premium_to_go);
  return next;
}

DiffusionPriceOfRisk diffusion_price_of_risk(double Pi, double pi, double sigma_l, double K,
                                             double S_delta) {
  require_probability(Pi, "Pi");
  require_probability(pi, "pi");
  require_K(K);
  require(sigma_l >= 0.0 && std::isfinite(sigma_l), "sigma_l must be >= 0");
  require(S_delta > 0.0, "S_delta must be > 0");
  const double var_Pi = Pi * (1.0 - Pi);
  const double sd_Pi = std::sqrt(var_Pi);
  const double sd_pi = std::sqrt(pi * (1.0 - pi));
  const double sk = std::sqrt(K);
  DiffusionPriceOfRisk out;
  out.sigma = var_Pi * sigma_l * S_delta;
  out.mu = var_Pi * sigma_l * sigma_l * price_of_model_risk(Pi, K) * sd_pi * S_delta;
  out.mu_over_sigma = (sk - 1.0 / sk) * sd_Pi * sd_pi * sigma_l;
  out.capm_approx = (K - 1.0) / S_delta * out.sigma;
  return out;
}

double verify_canonical_ode(const std::vector<double>& grid,
                            const std::function<double(double)>& candidate, double h) {
  require(h > 0.0, "h must be > 0");
  double worst = 0.0;
  for (double p : grid) {
    require(p - h > 0.0 && p + h < 1.0, "grid must stay inside (0, 1) by at least h");
    const double a_lo = candidate(p - h);
    const double a_mid = candidate(p);
    const double a_hi = candidate(p + h);
    const double d1 = (a_hi - a_lo) / (2.0 * h);
    const double d2 = (a_hi - 2.0 * a_mid + a_lo) / (h * h);
    require(d1 != 0.0, "candidate must have non-zero slope on the grid");
    const double lhs = d2 / (2.0 * d1);
    const double rhs = (p - a_mid) / (p * (1.0 - p));
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace rnelab::pricing
