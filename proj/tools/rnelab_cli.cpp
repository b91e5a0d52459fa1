// rnelab: config-driven runner for the belief, pricing and anomaly library.
//
//   rnelab simulate --config run.cfg --out-dir out
//   rnelab curves   --grid-points 1000
//   rnelab validate --threads 4
//
// Exit status: 0 ok, 1 model/shape error, 2 config error, 3 validation
// failure, 4 resource guard.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "rnelab/anomaly.hpp"
#include "rnelab/config.hpp"
#include "rnelab/estimation.hpp"
#include "rnelab/io.hpp"
#include "rnelab/market.hpp"
#include "rnelab/parallel.hpp"
#include "rnelab/rng.hpp"
#include "rnelab/validation.hpp"

namespace fs = std::filesystem;
using namespace rnelab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitModel = 1;
constexpr int kExitConfig = 2;
constexpr int kExitValidation = 3;
constexpr int kExitResource = 4;

constexpr std::size_t kSamplePaths = 20;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<unsigned> threads;
  std::optional<std::size_t> grid_points;
};

config::RunConfig resolve(const Flags& f) {
  config::RunConfig cfg = f.config_path.empty() ? config::RunConfig{} : config::load_config(f.config_path);
  if (f.seed) cfg.run.seed = *f.seed;
  if (f.out_dir) cfg.run.out_dir = *f.out_dir;
  if (f.threads) {
    if (*f.threads == 0) throw config::ConfigError(0, "--threads must be at least 1");
    cfg.run.threads = *f.threads;
  }
  if (f.grid_points) {
    if (*f.grid_points < 5) throw config::ConfigError(0, "--grid-points must be at least 5");
    cfg.analytics.grid_points = *f.grid_points;
  }
  cfg.market.threads = cfg.run.threads;
  cfg.validate();
  return cfg;
}

template <class Writer>
void emit(const config::RunConfig& cfg, const std::string& name, Writer&& w) {
  std::ostringstream os;
  w(os);
  const fs::path p = fs::path(cfg.run.out_dir) / name;
  io::write_file_atomic(p.string(), os.str());
  std::cout << "wrote " << p.string() << '\n';
}

void prepare_out_dir(const config::RunConfig& cfg) {
  fs::create_directories(cfg.run.out_dir);
  io::write_file_atomic((fs::path(cfg.run.out_dir) / "config.echo").string(), config::echo_config(cfg));
}

std::vector<io::LabeledBeliefPath> sample_belief_paths(const config::RunConfig& cfg) {
  std::vector<io::LabeledBeliefPath> out(kSamplePaths);
  const double prior = cfg.market.reference_prior();
  const std::uint64_t seed = derive_seed(cfg.run.seed, 0xBE11EF);
  parallel_for(out.size(), cfg.run.threads, [&](std::size_t i) {
    const Outcome b = i % 2 ? Outcome::minus : Outcome::plus;
    out[i] = {i, b, inference::simulate_belief_path(cfg.market.inference, b, prior, seed, i)};
  });
  return out;
}

std::vector<io::LabeledPricePath> sample_price_paths(const config::RunConfig& cfg) {
  std::vector<io::LabeledPricePath> out(kSamplePaths);
  const std::uint64_t seed = derive_seed(cfg.run.seed, 0x9121CE);
  const auto& ip = cfg.market.inference;
  parallel_for(out.size(), cfg.run.threads, [&](std::size_t i) {
    auto pp = cfg.market.pricing;
    pp.sign_change = i % 4 < 2 ? +1 : -1;
    pp.pi0 = cfg.market.reference_prior();
    const Outcome b = i % 2 ? Outcome::minus : Outcome::plus;
    GaussianStream rng(seed, i);
    auto& rec = out[i];
    rec.path_id = i;
    rec.b = b;
    rec.sign_change = pp.sign_change;
    rec.states.push_back(pricing::initial_price_state(pp));
    for (std::size_t k = 0; k < ip.steps(); ++k) {
      pricing::StepNoise z{rng.normal(), rng.normal()};
      rec.states.push_back(pricing::price_sde_step(rec.states.back(), pp, ip, b, ip.dt, z));
    }
  });
  return out;
}

std::vector<CohortCurve> measured_cohorts(const config::RunConfig& cfg, const market::MarketPanel& panel) {
  std::vector<CohortCurve> curves;
  for (double t : cfg.market.record_times) {
    for (CurveKind k : {CurveKind::momentum_plus, CurveKind::momentum_minus, CurveKind::volatility}) {
      market::Binning bin = cfg.binning();
      if (k != CurveKind::volatility) bin.bins = 0;
      curves.push_back(market::measure_expost_excess(panel, t, market::sort_cohorts(panel, t, bin, k),
                                                     cfg.estimation.n_min));
    }
  }
  return curves;
}

std::string lattice_tag(double rho, double K) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "rho%g_K%g", rho, K);
  return buf;
}

int cmd_simulate(const config::RunConfig& cfg) {
  prepare_out_dir(cfg);
  const auto panel = market::simulate_market(cfg.market, cfg.run.seed);
  emit(cfg, "panel.csv", [&](std::ostream& os) { io::write_panel_csv(os, panel); });
  emit(cfg, "belief_paths.csv", [&](std::ostream& os) { io::write_belief_paths_csv(os, sample_belief_paths(cfg)); });
  emit(cfg, "price_paths.csv", [&](std::ostream& os) {
    io::write_price_paths_csv(os, sample_price_paths(cfg), cfg.market.pricing.K);
  });
  return kExitOk;
}

int cmd_cohorts(const config::RunConfig& cfg) {
  prepare_out_dir(cfg);
  const auto panel = market::simulate_market(cfg.market, cfg.run.seed);
  emit(cfg, "cohorts.csv", [&](std::ostream& os) { io::write_cohort_csv(os, measured_cohorts(cfg, panel)); });
  return kExitOk;
}

int cmd_curves(const config::RunConfig& cfg) {
  prepare_out_dir(cfg);
  const auto base = cfg.anomaly_params();
  const double S = base.S_delta;
  const std::size_t n = cfg.analytics.grid_points;
  std::vector<io::PeakRecord> peaks;
  for (double rho : cfg.analytics.rho_grid) {
    for (double K : cfg.analytics.K_grid) {
      auto ap = base;
      ap.rho = rho;
      ap.K = K;
      std::vector<CohortCurve> curves{anomaly::momentum_curve(ap, +1, n), anomaly::momentum_curve(ap, -1, n),
                                      anomaly::vol_curve(ap, n)};
      emit(cfg, "curves_" + lattice_tag(rho, K) + ".csv", [&](std::ostream& os) { io::write_curve_csv(os, curves); });

      for (int s : {+1, -1}) {
        const auto f = anomaly::momentum_peak(rho, K, S, s);
        // search for the extremum on the side the closed form says it lies
        const double o = f.rp_max < 0 ? -1.0 : 1.0;
        const auto g = anomaly::grid_argmax(
            [&](double v) { return o * anomaly::momentum_excess(v, s, rho, K, S); }, 1e-3, 1 - 1e-3);
        const double gv = o * g.rp_max;
        peaks.push_back({s > 0 ? "momentum_plus" : "momentum_minus", rho, K, f.v_max, f.rp_max, f.rp_max, gv,
                         std::abs(gv - f.rp_max)});
      }
      const auto f = anomaly::lowrisk_peak(rho, K, S);
      const auto g =
          anomaly::grid_argmax([&](double v) { return anomaly::vol_conditioned_excess(v, ap); }, 1e-3, 0.5);
      peaks.push_back({"volatility", rho, K, g.v_max, g.rp_max, f.rp_max, g.rp_max, std::abs(g.rp_max - f.rp_max)});
    }
  }
  emit(cfg, "peaks.json", [&](std::ostream& os) { io::write_peaks_json(os, peaks); });
  return kExitOk;
}

int cmd_estimate(const config::RunConfig& cfg) {
  prepare_out_dir(cfg);
  estimation::RoundtripOptions o;
  o.t = cfg.analytics.eval_time;
  o.binning = cfg.binning();
  o.n_min = cfg.estimation.n_min;
  o.bootstrap = cfg.estimation.bootstrap;
  o.ci_level = cfg.estimation.ci_level;
  const auto rep = estimation::roundtrip(cfg.market, cfg.run.seed, o);
  emit(cfg, "estimate.csv", [&](std::ostream& os) { io::write_estimate_csv(os, {rep}); });
  emit(cfg, "estimate_curve.csv", [&](std::ostream& os) { io::write_cohort_csv(os, {rep.curve}); });
  std::cout << estimation::format_report(rep);
  return kExitOk;
}

int cmd_validate(const config::RunConfig& cfg) {
  const auto rep = validation::run_invariant_suite(cfg, [](const validation::CheckResult& r) {
    std::cout << (r.passed ? "PASS " : "FAIL ") << r.module << '/' << r.name << ": " << r.detail << std::endl;
  });
  std::cout << rep.checks.size() - rep.failures() << '/' << rep.checks.size() << " properties hold\n";
  return rep.all_passed() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Belief, pricing and anomaly experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags f;
  app.add_option("--config", f.config_path, "Run configuration file")->check(CLI::ExistingFile);
  app.add_option("--seed", f.seed, "Master seed (overrides [run] seed)");
  app.add_option("--out-dir", f.out_dir, "Output directory (overrides [run] out_dir)");
  app.add_option("--threads", f.threads, "Worker threads (overrides [run] threads)");
  app.add_option("--grid-points", f.grid_points, "Analytic curve resolution");

  int (*handler)(const config::RunConfig&) = nullptr;
  auto add = [&](const char* name, const char* help, int (*fn)(const config::RunConfig&)) {
    app.add_subcommand(name, help)->callback([&handler, fn] { handler = fn; });
  };
  add("simulate", "Simulate a market panel and sample paths", cmd_simulate);
  add("curves", "Analytic anomaly curves over the (rho, K) lattice", cmd_curves);
  add("cohorts", "Empirical cohort curves from a simulated panel", cmd_cohorts);
  add("estimate", "Round-trip (rho, K) estimation on a simulated panel", cmd_estimate);
  add("validate", "Run the invariant suite", cmd_validate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const auto cfg = resolve(f);
    return handler(cfg);
  } catch (const config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ResourceError& e) {
    std::cerr << "resource guard: " << e.what() << '\n';
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitModel;
  }
}
