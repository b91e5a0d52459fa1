#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace rnelab {

enum class CurveKind { momentum_plus, momentum_minus, volatility };

inline const char* kind_name(CurveKind k) {
  switch (k) {
    case CurveKind::momentum_plus: return "momentum_plus";
    case CurveKind::momentum_minus: return "momentum_minus";
    case CurveKind::volatility: return "volatility";
  }
  return "?";
}

/// One conditioning bin (or analytic grid point).
struct CurvePoint {
  double v = 0.0;
  double rp = 0.0;
  /// Asset count for empirical curves, density weight for analytic ones.
  double weight = 0.0;
  double se = 0.0;
  std::size_t n_plus = 0;
  std::size_t n_minus = 0;
  /// n_plus / n_minus for volatility bins, NaN when undefined.
  double mix_ratio = 0.0;
  double mix_se = 0.0;
  /// Mean of the closed-form momentum excess over the bin's own beliefs.
  double rp_model = 0.0;
  bool low_confidence = false;
  /// Bin edges for empirical curves.
  double lo = 0.0;
  double hi = 0.0;
};

struct CohortCurve {
  CurveKind kind = CurveKind::volatility;
  double t = 0.0;
  std::vector<CurvePoint> points;
};

}  // namespace rnelab
