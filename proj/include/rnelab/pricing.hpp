#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "rnelab/common.hpp"
#include "rnelab/inference.hpp"

namespace rnelab::pricing {

/// Canonical pricing inputs. Beliefs and prices refer to the "change" outcome
/// (Outcome::plus); sign_change says whether change raises (+1) or lowers (-1)
/// the asset's log-value.
struct PricingParams {
  double K = 1.5;
  int sign_change = +1;
  double S_delta = 1.0;
  double pi0 = 0.5;
  double bsure_premium_drift = 0.0;
  double rZ_delta = 0.0;
  double sigma_Z = 0.0;
  /// Pricing horizon T; the B-sure premium still to be earned is R * (T - t).
  double horizon = 100.0;
  /// When true, S_delta decays at rate rZ_delta instead of staying constant.
  bool decaying_impact = false;

  void validate() const;
};

/// RNE belief from the reference belief: O[Pi] = O[pi] / K^sign.
double rne_belief(double pi, double K, int sign_change);
/// Same map on log-odds, returning Pi with an accurate complement.
Probability rne_belief_from_log_odds(double pi_log_odds, double K, int sign_change);

/// k = (sqrt(K) - 1/sqrt(K)) * sqrt(Pi (1 - Pi)).
double price_of_model_risk(double Pi, double K);

/// y_minus + sign * S_delta * Pi - premium_to_go.
double canonical_price(double y_minus, double S_delta, double Pi, double bsure_premium_to_go,
                       int sign_change = +1);

struct PremiumDecomposition {
  double total_rp = 0.0;
  double bsure_part = 0.0;
  double model_part = 0.0;
  double price_of_model_risk = 0.0;
  /// model_part + (true_p - pi) S_delta, only when the true probability is given.
  std::optional<double> expost_gap;
};

struct BSurePremia {
  double plus = 0.0;
  double minus = 0.0;
};

PremiumDecomposition premium_decomposition(double pi, double A_plus, double S_delta,
                                           BSurePremia bsure_rps,
                                           std::optional<double> true_p = std::nullopt);

struct PriceState {
  double t = 0.0;
  double loglr = 0.0;
  double prior_log_odds = 0.0;
  double pi = 0.5;
  double pi_complement = 0.5;
  double Pi = 0.5;
  double Pi_complement = 0.5;
  double y_minus = 0.0;
  double S_delta = 1.0;
  double premium_to_go = 0.0;
  double S = 0.0;

  double k_pi(double K) const;
};

/// State at t = 0 with pi = params.pi0 and the given B-sure anchor.
PriceState initial_price_state(const PricingParams& params, double y_minus0 = 0.0);

struct StepNoise {
  double z_Z = 0.0;
  double z_D = 0.0;
};

/// Advances the state by dt. The log-LR moves by its exact Gaussian
/// increment (Z noise enters with the sign of change, D noise directly),
/// beliefs are recomputed from it, and S moves by the exact change of the
/// belief term plus the B-sure and model-drift terms.
PriceState price_sde_step(const PriceState& state, const PricingParams& pricing,
                          const inference::InferenceParams& inference, Outcome b, double dt,
                          StepNoise noise);

struct DiffusionPriceOfRisk {
  double mu_over_sigma = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double capm_approx = 0.0;
};

DiffusionPriceOfRisk diffusion_price_of_risk(double Pi, double pi, double sigma_l, double K,
                                             double S_delta);

/// Max over the grid of |A''/(2A') - (pi - A)/(pi(1 - pi))| with central
/// differences of step h.
double verify_canonical_ode(const std::vector<double>& grid,
                            const std::function<double(double)>& candidate, double h = 1e-4);

}  // namespace rnelab::pricing
