#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace rnelab {

/// Binary model-risk outcome. `plus` is the outcome the log-LR favours
/// (B = 1, "change" in the status-quo labelling), `minus` the base measure.
enum class Outcome { minus = 0, plus = 1 };

inline int indicator(Outcome b) { return b == Outcome::plus ? 1 : 0; }

/// (-1)^{1_minus(B)}: +1 for plus, -1 for minus.
inline double drift_sign(Outcome b) { return b == Outcome::plus ? 1.0 : -1.0; }

/// (-1)^B with B in {0, 1}.
inline double parity(Outcome b) { return b == Outcome::plus ? -1.0 : 1.0; }

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Log-odds are clamped here before exponentiation.
inline constexpr double kLogOddsLimit = 700.0;

inline double clamp_log_odds(double x) {
  if (x > kLogOddsLimit) return kLogOddsLimit;
  if (x < -kLogOddsLimit) return -kLogOddsLimit;
  return x;
}

/// Numerically stable 1 / (1 + e^{-x}); never NaN for finite or infinite x.
inline double logistic(double x) {
  x = clamp_log_odds(x);
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

inline double odds_for(double p) { return p / (1.0 - p); }

/// A probability together with its complement, both computed from the
/// log-odds so that p / (1 - p) stays accurate near 0 and 1.
struct Probability {
  double p = 0.5;
  double complement = 0.5;

  static Probability from_log_odds(double x) {
    return {logistic(x), logistic(-x)};
  }
  double odds() const { return p / complement; }
  double sd() const { return std::sqrt(p * complement); }
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw InputError(what);
}

inline void require_finite(double x, const char* name) {
  if (!std::isfinite(x)) throw InputError(std::string(name) + " must be finite");
}

inline void require_probability(double p, const char* name) {
  if (!(p > 0.0 && p < 1.0))
    throw InputError(std::string(name) + " must lie in (0, 1), got " + std::to_string(p));
}

}  // namespace rnelab
