#include "rnelab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace rnelab::stats {

void CompensatedSum::add(double x) {
  const double t = sum_ + x;
  if (std::abs(sum_) >= std::abs(x)) {
    comp_ += (sum_ - t) + x;
  } else {
    comp_ += (x - t) + sum_;
  }
  sum_ = t;
}

void MeanAccumulator::add(double x) {
  ++n_;
  sum_.add(x);
  sum_sq_.add(x * x);
}

double MeanAccumulator::mean() const { return n_ == 0 ? 0.0 : sum_.value() / static_cast<double>(n_); }

double MeanAccumulator::variance() const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  const double m = mean();
  const double v = (sum_sq_.value() - n * m * m) / (n - 1.0);
  return v > 0.0 ? v : 0.0;
}

double MeanAccumulator::standard_error() const {
  if (n_ < 2) return 0.0;
  return std::sqrt(variance() / static_cast<double>(n_));
}

double normal_pdf(double x, double mean, double sd) { return std::exp(normal_log_pdf(x, mean, sd)); }

double normal_log_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_cdf(double x, double mean, double sd) {
  return 0.5 * std::erfc(-(x - mean) / (sd * std::numbers::sqrt2));
}

double kolmogorov_q(double lambda) {
  if (lambda < 1e-3) return 1.0;
  if (lambda < 1.18) {
    // Jacobi-theta form converges fast for small lambda.
    const double y = std::exp(-std::numbers::pi * std::numbers::pi / (8.0 * lambda * lambda));
    // sum over odd k of y^{k^2} = y (1 + y^8 + y^24 + y^48 + ...)
    const double y8 = std::pow(y, 8.0);
    const double y16 = y8 * y8;
    const double cdf = std::sqrt(2.0 * std::numbers::pi) / lambda * y *
                       (1.0 + y8 * (1.0 + y16 * (1.0 + y8 * y16)));
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double q = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    q += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * q, 0.0, 1.0);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  KsResult out;
  out.n = sample.size();
  if (sample.empty()) return out;
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    const double lo = static_cast<double>(i) / n;
    const double hi = static_cast<double>(i + 1) / n;
    d = std::max({d, f - lo, hi - f});
  }
  out.statistic = d;
  const double sn = std::sqrt(n);
  out.p_value = kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
  return out;
}

}  // namespace rnelab::stats
