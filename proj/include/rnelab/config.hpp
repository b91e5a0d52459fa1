#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rnelab/anomaly.hpp"
#include "rnelab/common.hpp"
#include "rnelab/market.hpp"

namespace rnelab::config {

/// Parse error carrying the 1-based line it refers to (0 when not tied to a line).
class ConfigError : public InputError {
 public:
  ConfigError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct AnalyticsOptions {
  double eval_time = 2.5;
  std::size_t grid_points = 500;
  std::vector<double> rho_grid{1.0, 3.0, 9.0, 27.0};
  std::vector<double> K_grid{1.0, 1.2, 1.5, 1.9};
  double window_eps_p = inference::kDefaultWindowEpsP;
  double window_M_rho = inference::kDefaultWindowMRho;
};

struct EstimationOptions {
  std::size_t n_min = market::kDefaultMinBinCount;
  std::size_t bins = 25;
  market::Binning::Mode binning = market::Binning::Mode::equal_width;
  std::size_t bootstrap = 200;
  double ci_level = 0.95;
};

struct RunOptions {
  std::uint64_t seed = 20240611;
  unsigned threads = 1;
  std::string out_dir = "rnelab_out";
};

/// Quantities recomputed from primitives; echoed in the [derived] section.
struct Derived {
  double pi0 = 0.0;
  double Pi0_plus = 0.0;
  double Pi0_minus = 0.0;
  double sigma_l = 0.0;
  double t_p = 0.0;
  double t_rho = 0.0;
  double t_K = 0.0;
};

struct RunConfig {
  /// Documented defaults: K = 1.5, rho = 9, p1_0 = 0.49, sigma_lD = 0.5,
  /// dt = 0.05, N = 10^4 assets, evaluation at t = 2.5.
  RunConfig();

  market::MarketConfig market;
  AnalyticsOptions analytics;
  EstimationOptions estimation;
  RunOptions run;

  void validate() const;
  Derived derived() const;
  /// Cross-sectional parameters at the evaluation epoch.
  anomaly::AnomalyParams anomaly_params() const;
  market::Binning binning() const;
};

/// Parses the `[section]` / `key = value` format. Unknown sections or keys,
/// duplicates, malformed numbers, out-of-range values and [derived] entries
/// that disagree with recomputation all raise ConfigError.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

/// Canonical text form: every key, fixed order, 17 significant digits, plus
/// the [derived] section. parse_config(echo_config(c)) reproduces c.
std::string echo_config(const RunConfig& c);

}  // namespace rnelab::config
