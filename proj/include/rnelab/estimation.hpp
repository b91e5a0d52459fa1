#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "rnelab/curve.hpp"
#include "rnelab/market.hpp"

namespace rnelab::estimation {

struct PeakOptions {
  /// Points with weight below this are ignored (empirical bins with too few assets).
  double min_weight = 0.0;
  /// Significance, in standard errors, needed before a second hump counts as a peak.
  double noise_sigmas = 3.0;
};

struct PeakFit {
  double v_max = 0.0;
  double rp_max = 0.0;
  /// False when the quadratic was rejected and the raw argmax returned.
  bool quadratic_used = false;
  double fit_rms = 0.0;
  std::size_t argmax_index = 0;
  std::size_t usable_points = 0;
};

/// Locates the maximum of a curve with a 5-point local quadratic fit around
/// the discrete argmax (weighted by 1/se^2 when standard errors exist).
/// Volatility curves are mirrored about v = 1/2 first, so a peak at 1/2 is
/// an interior point. Throws ShapeError for flat, monotone or multi-peaked
/// curves; noisy curves are only rejected on significant violations.
PeakFit find_peak(const CohortCurve& curve, const PeakOptions& opts = {});

struct RecoveredParams {
  double rho_hat = 1.0;
  double K_hat = 1.0;
};

/// rho = 1/v_max - 1, K = (1 + 2r)/(1 - 2r) with r = rp_max/S_delta.
RecoveredParams recover_params(double v_max, double rp_max, double S_delta);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct EstimationResult {
  double v_max_hat = 0.0;
  double rp_max_hat = 0.0;
  double rho_hat = 1.0;
  double K_hat = 1.0;
  PeakFit fit;
  /// Fraction of bins with at least n_min assets.
  double bin_coverage = 0.0;
  bool in_window = false;
  bool bias_dominant = false;
  bool objective_dominated = false;
  Interval rho_ci;
  Interval K_ci;
  std::size_t bootstrap_ok = 0;
  std::size_t bootstrap_failed = 0;
};

struct RoundtripOptions {
  /// Evaluation epoch; defaults to the first record time.
  std::optional<double> t;
  market::Binning binning;
  std::size_t n_min = market::kDefaultMinBinCount;
  std::size_t bootstrap = 200;
  double ci_level = 0.95;
};

struct RoundtripReport {
  double K_true = 1.0;
  double rho_true = 1.0;
  double t = 0.0;
  std::size_t n_assets = 0;
  std::uint64_t seed = 0;
  EstimationResult estimate;
  CohortCurve curve;
};

/// simulate_market -> volatility cohorts -> ex-post excess -> find_peak ->
/// recover_params, with an asset bootstrap for confidence intervals.
RoundtripReport roundtrip(const market::MarketConfig& config, std::uint64_t seed,
                          const RoundtripOptions& opts = {});

/// Same pipeline on an existing panel.
RoundtripReport estimate_panel(const market::MarketPanel& panel, const RoundtripOptions& opts = {});

/// Multi-line human-readable summary.
std::string format_report(const RoundtripReport& r);

}  // namespace rnelab::estimation
