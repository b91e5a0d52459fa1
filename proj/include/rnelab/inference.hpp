#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "rnelab/common.hpp"

namespace rnelab::inference {

/// Signal-to-noise override on [t_begin, t_end).
struct ScheduleSegment {
  double t_begin = 0.0;
  double t_end = 0.0;
  double sigma_lZ = 0.0;
  double sigma_lD = 0.0;
};

/// Signal-to-noise schedule and simulation grid for the log-LR diffusion.
/// Outside every override segment the base (sigma_lZ, sigma_lD) applies.
struct InferenceParams {
  double sigma_lZ = 0.0;
  double sigma_lD = 0.5;
  double dt = 0.01;
  double t_max = 10.0;
  std::vector<ScheduleSegment> schedule;

  /// Throws InputError on negative rates, bad grid or overlapping segments.
  void validate() const;

  double sigma_lZ_at(double t) const;
  double sigma_lD_at(double t) const;
  /// sqrt(sigma_lZ^2 + sigma_lD^2) at t.
  double sigma_l_at(double t) const;
  /// Exact integral of sigma_l^2 over [0, t].
  double cumulative_variance(double t) const;
  /// Exact integrals of sigma_lZ^2 and sigma_lD^2 over [0, t].
  std::pair<double, double> cumulative_variance_split(double t) const;
  /// Number of grid steps covering [0, t_max].
  std::size_t steps() const;

 private:
  const ScheduleSegment* segment_at(double t) const;
};

/// Log-LR increment over dt driven by one standard-normal draw. Exact in
/// distribution for a constant signal-to-noise over the step.
double loglr_increment(Outcome b, double sigma_l, double dt, double gauss_noise);

/// Bayes' rule in odds form: O[pi] = prior_odds * exp(loglr).
/// Saturates smoothly at the log-odds clamp instead of overflowing.
double posterior_from_loglr(double prior_odds, double loglr);

/// Same as above but also returns the complement accurately.
Probability posterior_probability(double prior_odds, double loglr);

struct BeliefState {
  double t = 0.0;
  double loglr = 0.0;
  double pi = 0.5;
  double pi_complement = 0.5;
  double prior_odds = 1.0;

  double odds() const { return pi / pi_complement; }
};

using BeliefPath = std::vector<BeliefState>;

/// Simulates one reference-belief path on the params grid. The log-LR is
/// built from exact Gaussian increments and pi is recomputed from it at
/// every step. Draws come from substream (seed, path_index).
BeliefPath simulate_belief_path(const InferenceParams& params, Outcome b, double prior,
                                std::uint64_t seed, std::uint64_t path_index = 0);

struct ResolutionDiagnostic {
  double cumulative_variance = 0.0;
  bool resolving = false;
};

/// Cumulative log-LR variance up to t, and whether it keeps growing linearly
/// from t onwards (the LR process then violates Novikov's condition and B
/// resolves).
ResolutionDiagnostic resolution_diagnostic(const InferenceParams& params, double t);

/// Log-LR hurdles and their time-denominated versions for one
/// (p1_0, rho, K, sigma_l) configuration.
struct Milestones {
  double H_p = 0.0;
  double H_Pi_plus = 0.0;
  double H_Pi_minus = 0.0;
  double t_p = 0.0;
  double t_rho = 0.0;
  double t_K = 0.0;

  double t_Pi_plus() const { return t_rho + t_K + t_p; }
  double t_Pi_minus() const { return t_rho - t_K + t_p; }

  /// Requires p1_0 in (0,1), rho >= 1, K >= 1, sigma_l > 0.
  static Milestones from(double p1_0, double rho, double K, double sigma_l);
};

enum class CertaintyTarget { objective, rne_plus, rne_minus };

/// Certainty indicator C_t(B) = 1/2 sigma_l sqrt(t) ((-1)^B + t_target / t).
double certainty_tracker(double t, const Milestones& m, Outcome b, double sigma_l,
                         CertaintyTarget target);

inline constexpr double kDefaultWindowEpsP = 0.2;
inline constexpr double kDefaultWindowMRho = 5.0;

/// True iff t_p / t <= eps_p and t_rho / t >= M_rho.
bool window_check(double t, const Milestones& m, double eps_p = kDefaultWindowEpsP,
                  double M_rho = kDefaultWindowMRho);

enum class Branch { plus, minus };

/// log[1 +- u/t] + |C^p_{t +- u}|^2 - |C^p_t|^2: log-LR of an in-window
/// profitable event at t against the same event at t +- u.
double event_dominance_loglr(double t, double u, const Milestones& m, double sigma_l,
                             Branch branch, Outcome b = Outcome::plus);

/// Time-homogeneous redundancy map between two log-LR processes:
/// g(l) = g0 - log[g1 e^{-l} + 1 - g1] for B = plus,
/// g(l) = g0 + log[g1 e^{l} + 1 - g1] for B = minus, with g1 = g'(0) in (0, 1].
double redundancy_map(double l, double g0, double g1, Outcome b);

/// Max over [l_lo, l_hi] of |g'' + (-1)^{1_plus(B)} (g' - 1) g'| by central
/// differences of step h; below ~1e-3 rounding in the second difference dominates.
double redundancy_ode_residual(double g0, double g1, Outcome b, double l_lo = -5.0,
                               double l_hi = 5.0, double h = 1e-3);

}  // namespace rnelab::inference
