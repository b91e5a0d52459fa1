#pragma once

#include <cstdint>
#include <vector>

#include "rnelab/common.hpp"
#include "rnelab/curve.hpp"
#include "rnelab/inference.hpp"
#include "rnelab/pricing.hpp"

namespace rnelab::market {

struct TruthParams {
  double p1_0 = 0.1;
  double rho = 9.0;
};

/// Which law the simulated outcomes B are drawn from. `truth` is the
/// model market; the other two are diagnostic re-weightings used to check
/// the martingale property of reference and RNE beliefs.
enum class OutcomeLaw { truth, reference, rne };

struct MarketConfig {
  std::size_t n_assets = 10000;
  TruthParams truth;
  /// pi0 is ignored: every asset's priors come from the truth parameters.
  pricing::PricingParams pricing;
  inference::InferenceParams inference;
  double sign_prob_plus = 0.5;
  std::vector<double> record_times{2.5};
  OutcomeLaw outcome_law = OutcomeLaw::truth;
  /// Resource guard on n_assets * steps.
  double max_work = 2e9;
  unsigned threads = 1;

  void validate() const;
  /// O[pi_0] = O[p1_0] / rho.
  double reference_prior() const;
  /// O[Pi_0] = O[p1_0] / (rho K^sign).
  double rne_prior(int sign_change) const;
  /// Simulation steps needed to reach the last record time.
  std::size_t steps() const;
};

struct PathRecord {
  double t = 0.0;
  double loglr = 0.0;
  double pi = 0.0;
  double Pi = 0.0;
  double Pi_complement = 0.0;
  double S = 0.0;
  /// True conditional probability of change given the data so far.
  double p_true = 0.0;
};

struct AssetPath {
  std::size_t asset_id = 0;
  Outcome b = Outcome::minus;
  int sign_change = +1;
  /// One record per config record time, same order.
  std::vector<PathRecord> records;
};

struct MarketPanel {
  MarketConfig config;
  std::uint64_t seed = 0;
  std::vector<AssetPath> assets;

  /// Index of `t` among the record times; throws InputError if absent.
  std::size_t record_index(double t) const;
};

MarketPanel simulate_market(const MarketConfig& config, std::uint64_t seed);

struct Binning {
  enum class Mode { equal_width, edges, quantiles };
  Mode mode = Mode::equal_width;
  /// Bin count for equal_width and quantiles. 0 picks the default
  /// (50 over (0,1) for momentum, 25 over (0,1/2] for volatility).
  std::size_t bins = 0;
  std::vector<double> edges;
};

inline constexpr std::size_t kDefaultMinBinCount = 50;

/// Groups assets by Pi^1_t (momentum kinds, one sign each) or by belief
/// volatility, folding v and 1-v (volatility kind). Bins keep their edges,
/// counts and sign mix; empty bins stay in the curve with weight 0.
CohortCurve sort_cohorts(const MarketPanel& panel, double t, const Binning& binning,
                         CurveKind conditioning);

/// Fills rp with each bin's mean of sign (1_{B=plus} - Pi) S_delta, along
/// with its standard error and the closed-form excess averaged over the
/// same assets.
CohortCurve measure_expost_excess(const MarketPanel& panel, double t, const CohortCurve& cohorts,
                                  std::size_t n_min = kDefaultMinBinCount);

struct DriftPart {
  double mean = 0.0;
  double se = 0.0;
};

struct DecompositionGroup {
  std::size_t n = 0;
  DriftPart total;
  DriftPart priced;
  DriftPart bias;
  /// total - priced - bias, i.e. mean sign (1_B - p_t) S_delta; zero in expectation.
  DriftPart residual;
};

struct ExpostDecomposition {
  DecompositionGroup plus;
  DecompositionGroup minus;
  DecompositionGroup pooled;
};

/// Splits the measured ex-post drift sign (1_B - Pi) S_delta into the
/// priced part sign (pi - Pi) S_delta and the bias part sign (p_t - pi) S_delta.
ExpostDecomposition expost_decomposition(const MarketPanel& panel, double t);

}  // namespace rnelab::market
