#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace rnelab::stats {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

/// Mean / variance accumulator with compensated sums; order-dependent only
/// through the order of `add` calls.
class MeanAccumulator {
 public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const;
  /// Unbiased sample variance (0 when fewer than two samples).
  double variance() const;
  double standard_error() const;

 private:
  std::size_t n_ = 0;
  CompensatedSum sum_;
  CompensatedSum sum_sq_;
};

double normal_pdf(double x, double mean, double sd);
double normal_log_pdf(double x, double mean, double sd);
double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

/// Kolmogorov survival function Q(lambda) = 2 sum (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// One-sample two-sided Kolmogorov-Smirnov test against `cdf`.
/// Asymptotic p-value with Stephens' small-sample correction.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

}  // namespace rnelab::stats
