#pragma once

#include <functional>
#include <vector>

#include "rnelab/common.hpp"
#include "rnelab/curve.hpp"
#include "rnelab/inference.hpp"

namespace rnelab::anomaly {

/// Cross-sectional evaluation point: uniform (rho, K, S_delta, sigma_l)
/// across assets, objective hurdle H_p and epoch t.
struct AnomalyParams {
  double rho = 9.0;
  double K = 1.5;
  double S_delta = 1.0;
  double H_p = 0.04000533461369913;  // logit(0.51), i.e. p1_0 = 0.49
  double sigma_l = 0.5;
  double t = 2.5;

  void validate() const;
  /// True unconditional probability of change, 1 / (1 + e^{H_p}).
  double p1_0() const;
  /// Milestones for rho' = max(rho, 1/rho); see label_switched().
  inference::Milestones milestones() const;
  double tp_over_t() const;
  double trho_over_t() const;
  double tK_over_t() const;
  bool bias_dominant(double M_rho = inference::kDefaultWindowMRho) const;
  bool objective_dominated(double eps_p = inference::kDefaultWindowEpsP) const;
  bool in_window(double eps_p = inference::kDefaultWindowEpsP,
                 double M_rho = inference::kDefaultWindowMRho) const;
};

/// +-v(1-v)(1 - 1/a)/(v + (1-v)/a) S_delta with a = rho K^{+-1}.
double momentum_excess(double v, int sign_change, double rho, double K, double S_delta);

struct Peak {
  double v_max = 0.0;
  double rp_max = 0.0;
};

Peak momentum_peak(double rho, double K, double S_delta, int sign_change);
/// Long the plus peak, short the minus peak: (rp+ - rp-)/2.
double pair_trade_peak(double rho, double K, double S_delta);

/// ((1-v)/v)^{-(t_Pi+-/t) - (-1)^B}.
double event_likelihood_ratio(double v, double t, const inference::Milestones& m,
                              int sign_change, Outcome b);

/// (rho v/(1-v))^{-t_K/t} K^{-(t_p/t) - (-1)^B}.
double momentum_mix(double v, double t, const inference::Milestones& m, double rho, double K,
                    Outcome b);

/// M_{t|v} (1 + R_{t|+}) / (1 + R_{t|-}).
double vol_mix(double v, double t, const inference::Milestones& m, double rho, double K,
               Outcome b);

/// Density of {Pi^1_t = u} jointly with the sign of change, mixing B with
/// its true law; the unconditional sign mix is 1/2.
double belief_density(double u, int sign_change, const AnomalyParams& params);

/// Volatility-conditioned ex-post excess: density-weighted average of the
/// momentum excess over both signs and both beliefs v and 1-v.
double vol_conditioned_excess(double v, const AnomalyParams& params);

/// The same average with equal weights on the two signs at v only.
/// Its maximum is the closed-form low-risk peak.
double vol_excess_equal_mix(double v, const AnomalyParams& params);

/// v_max = 1/(rho + 1), rp_max = (K-1)/(2(K+1)) S_delta, rho < 1 is
/// label-switched to 1/rho first.
Peak lowrisk_peak(double rho, double K, double S_delta);

/// Leading-order error scale (K-1) H_p / (sigma_l^2 t) of the low-risk peak.
double lowrisk_error_scale(const AnomalyParams& params);

/// Grid argmax of f on [lo, hi] with spacing `step`, refined at `fine`
/// spacing around the winner.
Peak grid_argmax(const std::function<double(double)>& f, double lo, double hi,
                 double step = 1e-3, double fine = 1e-4);

/// Analytic curves on an evenly spaced grid of `points` values.
CohortCurve momentum_curve(const AnomalyParams& params, int sign_change, std::size_t points);
CohortCurve vol_curve(const AnomalyParams& params, std::size_t points);

}  // namespace rnelab::anomaly
