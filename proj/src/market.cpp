#include "rnelab/market.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rnelab/anomaly.hpp"
#include "rnelab/parallel.hpp"
#include "rnelab/rng.hpp"
#include "rnelab/stats.hpp"

namespace rnelab::market {

namespace {

constexpr std::uint64_t kAssetStreamTag = 0x61737365745f7061ull;

std::size_t grid_index(double t, double dt) {
  const double k = std::round(t / dt);
  if (std::abs(k * dt - t) > 1e-9 * std::max(1.0, t))
    throw InputError("record time " + std::to_string(t) + " is not a multiple of dt");
  return static_cast<std::size_t>(k);
}

double impact_at(const pricing::PricingParams& p, double t) {
  return p.decaying_impact ? p.S_delta - p.rZ_delta * t : p.S_delta;
}

double folded(const PathRecord& r) { return std::min(r.Pi, r.Pi_complement); }

}  // namespace

void MarketConfig::validate() const {
  require(n_assets >= 1, "n_assets must be >= 1");
  require_probability(truth.p1_0, "p1_0");
  require(std::isfinite(truth.rho) && truth.rho > 0.0, "rho must be > 0");
  pricing.validate();
  inference.validate();
  require_probability(sign_prob_plus, "sign_prob_plus");
  require(!record_times.empty(), "record_times must not be empty");
  for (std::size_t i = 0; i < record_times.size(); ++i) {
    require(record_times[i] >= 0.0 && record_times[i] <= inference.t_max,
            "record times must lie in [0, t_max]");
    if (i > 0) require(record_times[i] > record_times[i - 1], "record times must increase");
    grid_index(record_times[i], inference.dt);
  }
  if (pricing.rZ_delta > 0.0 && pricing.sigma_Z > 0.0) {
    const double implied = pricing.rZ_delta / pricing.sigma_Z;
    require(std::abs(implied - inference.sigma_lZ) <= 1e-12 * std::max(1.0, implied),
            "sigma_lZ must equal rZ_delta / sigma_Z");
  }
  require(max_work > 0.0, "max_work must be > 0");
  require(threads >= 1, "threads must be >= 1");
}

double MarketConfig::reference_prior() const {
  return logistic(logit(truth.p1_0) - std::log(truth.rho));
}

double MarketConfig::rne_prior(int sign_change) const {
  return logistic(logit(truth.p1_0) - std::log(truth.rho) -
                  sign_change * std::log(pricing.K));
}

std::size_t MarketConfig::steps() const {
  return grid_index(record_times.back(), inference.dt);
}

std::size_t MarketPanel::record_index(double t) const {
  const auto& rt = config.record_times;
  for (std::size_t i = 0; i < rt.size(); ++i)
    if (std::abs(rt[i] - t) <= 1e-12 * std::max(1.0, t)) return i;
  throw InputError("t = " + std::to_string(t) + " is not a record time");
}

MarketPanel simulate_market(const MarketConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t steps = config.steps();
  const double work = static_cast<double>(config.n_assets) * static_cast<double>(steps);
  if (work > config.max_work)
    throw ResourceError("n_assets * steps = " + std::to_string(work) + " exceeds max_work");

  std::vector<std::size_t> record_steps;
  for (double t : config.record_times) record_steps.push_back(grid_index(t, config.inference.dt));

  MarketPanel panel;
  panel.config = config;
  panel.seed = seed;
  panel.assets.resize(config.n_assets);
  const std::uint64_t stream_seed = derive_seed(seed, kAssetStreamTag);
  const double dt = config.inference.dt;
  const double log_p_odds = logit(config.truth.p1_0);

  parallel_for(config.n_assets, config.threads, [&](std::size_t i) {
    GaussianStream rng(stream_seed, i);
    AssetPath& a = panel.assets[i];
    a.asset_id = i;
    a.sign_change = rng.uniform() < config.sign_prob_plus ? +1 : -1;
    double p_change = config.truth.p1_0;
    if (config.outcome_law == OutcomeLaw::reference) p_change = config.reference_prior();
    if (config.outcome_law == OutcomeLaw::rne) p_change = config.rne_prior(a.sign_change);
    a.b = rng.uniform() < p_change ? Outcome::plus : Outcome::minus;

    pricing::PricingParams pp = config.pricing;
    pp.pi0 = config.reference_prior();
    pp.sign_change = a.sign_change;
    auto state = pricing::initial_price_state(pp);

    a.records.reserve(record_steps.size());
    std::size_t next = 0;
    auto record = [&](std::size_t step) {
      while (next < record_steps.size() && record_steps[next] == step) {
        PathRecord r;
        r.t = config.record_times[next];
        r.loglr = state.loglr;
        r.pi = state.pi;
        r.Pi = state.Pi;
        r.Pi_complement = state.Pi_complement;
        r.S = state.S;
        r.p_true = logistic(log_p_odds + clamp_log_odds(state.loglr));
        a.records.push_back(r);
        ++next;
      }
    };
    record(0);
    for (std::size_t k = 1; k <= steps; ++k) {
      pricing::StepNoise z;
      z.z_Z = rng.normal();
      z.z_D = rng.normal();
      state = pricing::price_sde_step(state, pp, config.inference, a.b, dt, z);
      state.t = static_cast<double>(k) * dt;
      record(k);
    }
  });
  return panel;
}

CohortCurve sort_cohorts(const MarketPanel& panel, double t, const Binning& binning,
                         CurveKind conditioning) {
  const std::size_t ri = panel.record_index(t);
  const bool vol = conditioning == CurveKind::volatility;
  const int want_sign = conditioning == CurveKind::momentum_minus ? -1 : +1;
  const double dom_lo = 0.0;
  const double dom_hi = vol ? 0.5 : 1.0;

  auto key = [&](const AssetPath& a) {
    const auto& r = a.records[ri];
    return vol ? folded(r) : r.Pi;
  };
  auto member = [&](const AssetPath& a) { return vol || a.sign_change == want_sign; };

  std::vector<double> edges;
  switch (binning.mode) {
    case Binning::Mode::equal_width: {
      const std::size_t nb = binning.bins ? binning.bins : (vol ? 25 : 50);
      for (std::size_t i = 0; i <= nb; ++i)
        edges.push_back(dom_lo + (dom_hi - dom_lo) * static_cast<double>(i) / static_cast<double>(nb));
      break;
    }
    case Binning::Mode::edges:
      edges = binning.edges;
      require(edges.size() >= 2, "need at least two bin edges");
      for (std::size_t i = 1; i < edges.size(); ++i)
        require(edges[i] > edges[i - 1], "bin edges must increase");
      break;
    case Binning::Mode::quantiles: {
      const std::size_t nb = binning.bins ? binning.bins : (vol ? 25 : 50);
      std::vector<double> xs;
      for (const auto& a : panel.assets)
        if (member(a)) xs.push_back(key(a));
      require(!xs.empty(), "no assets to bin");
      std::sort(xs.begin(), xs.end());
      edges.push_back(dom_lo);
      for (std::size_t q = 1; q < nb; ++q) {
        const std::size_t j = q * xs.size() / nb;
        const double e = j == 0 ? xs[0] : 0.5 * (xs[j - 1] + xs[j]);
        if (e > edges.back() && e < dom_hi) edges.push_back(e);
      }
      edges.push_back(dom_hi);
      break;
    }
  }

  CohortCurve c;
  c.kind = conditioning;
  c.t = t;
  const std::size_t nb = edges.size() - 1;
  c.points.resize(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    c.points[b].lo = edges[b];
    c.points[b].hi = edges[b + 1];
    c.points[b].v = 0.5 * (edges[b] + edges[b + 1]);
  }
  for (const auto& a : panel.assets) {
    if (!member(a)) continue;
    const double x = key(a);
    if (x < edges.front() || x > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = b == 0 ? 0 : std::min(b - 1, nb - 1);
    auto& pt = c.points[b];
    pt.weight += 1.0;
    (a.sign_change > 0 ? pt.n_plus : pt.n_minus) += 1;
  }
  for (auto& pt : c.points) {
    const double n = pt.weight;
    if (pt.n_minus > 0) {
      pt.mix_ratio = static_cast<double>(pt.n_plus) / static_cast<double>(pt.n_minus);
      const double q = static_cast<double>(pt.n_plus) / n;
      pt.mix_se = std::sqrt(q * (1.0 - q) / n) / ((1.0 - q) * (1.0 - q));
    } else {
      pt.mix_ratio = std::numeric_limits<double>::quiet_NaN();
      pt.mix_se = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return c;
}

CohortCurve measure_expost_excess(const MarketPanel& panel, double t, const CohortCurve& cohorts,
                                  std::size_t n_min) {
  require(!cohorts.points.empty(), "cohort curve has no bins");
  const std::size_t ri = panel.record_index(t);
  const bool vol = cohorts.kind == CurveKind::volatility;
  const int want_sign = cohorts.kind == CurveKind::momentum_minus ? -1 : +1;
  const auto& cfg = panel.config;
  const double S = impact_at(cfg.pricing, t);

  std::vector<double> edges;
  for (const auto& pt : cohorts.points) edges.push_back(pt.lo);
  edges.push_back(cohorts.points.back().hi);
  const std::size_t nb = cohorts.points.size();

  std::vector<stats::MeanAccumulator> excess(nb), model(nb);
  for (const auto& a : panel.assets) {
    if (!vol && a.sign_change != want_sign) continue;
    const auto& r = a.records[ri];
    const double x = vol ? folded(r) : r.Pi;
    if (x < edges.front() || x > edges.back()) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = b == 0 ? 0 : std::min(b - 1, nb - 1);
    const double s = a.sign_change;
    // 1 - Pi via the stored complement keeps precision near Pi = 1.
    const double gap = a.b == Outcome::plus ? r.Pi_complement : -r.Pi;
    excess[b].add(s * gap * S);
    model[b].add(anomaly::momentum_excess(std::clamp(r.Pi, 1e-300, 1.0 - 1e-16), a.sign_change,
                                          cfg.truth.rho, cfg.pricing.K, S));
  }

  CohortCurve out = cohorts;
  out.t = t;
  for (std::size_t b = 0; b < nb; ++b) {
    auto& pt = out.points[b];
    pt.weight = static_cast<double>(excess[b].count());
    pt.rp = excess[b].mean();
    pt.se = excess[b].standard_error();
    pt.rp_model = model[b].mean();
    pt.low_confidence = excess[b].count() < n_min;
  }
  return out;
}

namespace {

DriftPart part_of(const stats::MeanAccumulator& acc) { return {acc.mean(), acc.standard_error()}; }

struct GroupAcc {
  stats::MeanAccumulator total, priced, bias, residual;

  void add(double tot, double pr, double bi, double re) {
    total.add(tot);
    priced.add(pr);
    bias.add(bi);
    residual.add(re);
  }
  DecompositionGroup result() const {
    return {total.count(), part_of(total), part_of(priced), part_of(bias), part_of(residual)};
  }
};

}  // namespace

ExpostDecomposition expost_decomposition(const MarketPanel& panel, double t) {
  const std::size_t ri = panel.record_index(t);
  const double S = impact_at(panel.config.pricing, t);
  GroupAcc plus, minus, pooled;
  for (const auto& a : panel.assets) {
    const auto& r = a.records[ri];
    const double s = a.sign_change;
    const double outcome = indicator(a.b);
    const double tot = s * (outcome - r.Pi) * S;
    const double pr = s * (r.pi - r.Pi) * S;
    const double bi = s * (r.p_true - r.pi) * S;
    const double re = s * (outcome - r.p_true) * S;
    (a.sign_change > 0 ? plus : minus).add(tot, pr, bi, re);
    pooled.add(tot, pr, bi, re);
  }
  return {plus.result(), minus.result(), pooled.result()};
}

}  // namespace rnelab::market
