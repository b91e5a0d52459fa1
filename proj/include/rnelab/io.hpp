#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "rnelab/curve.hpp"
#include "rnelab/estimation.hpp"
#include "rnelab/inference.hpp"
#include "rnelab/market.hpp"
#include "rnelab/pricing.hpp"

namespace rnelab::io {

/// 17 significant digits; "nan" / "inf" for non-finite values.
std::string format_double(double x);

/// asset_id,t,pi,Pi,S,B,sign
void write_panel_csv(std::ostream& os, const market::MarketPanel& panel);

/// t,kind,v_bin,rp,se,n,mix_ratio
void write_cohort_csv(std::ostream& os, const std::vector<CohortCurve>& curves);

struct LabeledBeliefPath {
  std::size_t path_id = 0;
  Outcome b = Outcome::minus;
  inference::BeliefPath path;
};

/// path_id,t,loglr,pi,B,resolved_flag; resolved means |pi - 1_{B=plus}| < eps.
void write_belief_paths_csv(std::ostream& os, const std::vector<LabeledBeliefPath>& paths,
                            double eps = 0.01);

struct LabeledPricePath {
  std::size_t path_id = 0;
  Outcome b = Outcome::minus;
  int sign_change = +1;
  std::vector<pricing::PriceState> states;
};

/// path_id,t,pi,Pi,S,k_pi,B,sign
void write_price_paths_csv(std::ostream& os, const std::vector<LabeledPricePath>& paths,
                           double K);

/// kind,v,rp,weight
void write_curve_csv(std::ostream& os, const std::vector<CohortCurve>& curves);

struct PeakRecord {
  std::string label;
  double rho = 1.0;
  double K = 1.0;
  double v_max = 0.0;
  double rp_max = 0.0;
  double formula_value = 0.0;
  double grid_value = 0.0;
  double abs_gap = 0.0;
};

/// JSON array of {label, rho, K, v_max, rp_max, formula_value, grid_value, abs_gap}.
void write_peaks_json(std::ostream& os, const std::vector<PeakRecord>& peaks);

/// K_true,rho_true,K_hat,rho_hat,v_max,rp_max,K_ci_lo,K_ci_hi,rho_ci_lo,rho_ci_hi,n_assets,seed
void write_estimate_csv(std::ostream& os, const std::vector<estimation::RoundtripReport>& rows);

/// Writes `content` to `path` via a temporary file renamed into place, so
/// a failed run never leaves a truncated file under the final name.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace rnelab::io
