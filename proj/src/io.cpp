#include "rnelab/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"

namespace rnelab::io {

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

const char* outcome_str(Outcome b) { return b == Outcome::plus ? "1" : "0"; }

}  // namespace

void write_panel_csv(std::ostream& os, const market::MarketPanel& panel) {
  os << "asset_id,t,pi,Pi,S,B,sign\n";
  for (const auto& a : panel.assets) {
    for (const auto& r : a.records) {
      os << a.asset_id << ',' << format_double(r.t) << ',' << format_double(r.pi) << ','
         << format_double(r.Pi) << ',' << format_double(r.S) << ',' << outcome_str(a.b) << ','
         << a.sign_change << '\n';
    }
  }
}

void write_cohort_csv(std::ostream& os, const std::vector<CohortCurve>& curves) {
  os << "t,kind,v_bin,rp,se,n,mix_ratio\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << format_double(c.t) << ',' << kind_name(c.kind) << ',' << format_double(p.v) << ','
         << format_double(p.rp) << ',' << format_double(p.se) << ','
         << static_cast<std::uint64_t>(p.weight) << ',' << format_double(p.mix_ratio) << '\n';
    }
  }
}

void write_belief_paths_csv(std::ostream& os, const std::vector<LabeledBeliefPath>& paths,
                            double eps) {
  os << "path_id,t,loglr,pi,B,resolved_flag\n";
  for (const auto& p : paths) {
    for (const auto& s : p.path) {
      const double miss = p.b == Outcome::plus ? s.pi_complement : s.pi;
      os << p.path_id << ',' << format_double(s.t) << ',' << format_double(s.loglr) << ','
         << format_double(s.pi) << ',' << outcome_str(p.b) << ',' << (miss < eps ? 1 : 0) << '\n';
    }
  }
}

void write_price_paths_csv(std::ostream& os, const std::vector<LabeledPricePath>& paths,
                           double K) {
  os << "path_id,t,pi,Pi,S,k_pi,B,sign\n";
  for (const auto& p : paths) {
    for (const auto& s : p.states) {
      os << p.path_id << ',' << format_double(s.t) << ',' << format_double(s.pi) << ','
         << format_double(s.Pi) << ',' << format_double(s.S) << ',' << format_double(s.k_pi(K))
         << ',' << outcome_str(p.b) << ',' << p.sign_change << '\n';
    }
  }
}

void write_curve_csv(std::ostream& os, const std::vector<CohortCurve>& curves) {
  os << "kind,v,rp,weight\n";
  for (const auto& c : curves) {
    for (const auto& p : c.points) {
      os << kind_name(c.kind) << ',' << format_double(p.v) << ',' << format_double(p.rp) << ','
         << format_double(p.weight) << '\n';
    }
  }
}

void write_peaks_json(std::ostream& os, const std::vector<PeakRecord>& peaks) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& p : peaks) {
    nlohmann::ordered_json j;
    j["label"] = p.label;
    j["rho"] = p.rho;
    j["K"] = p.K;
    j["v_max"] = p.v_max;
    j["rp_max"] = p.rp_max;
    j["formula_value"] = p.formula_value;
    j["grid_value"] = p.grid_value;
    j["abs_gap"] = p.abs_gap;
    arr.push_back(std::move(j));
  }
  os << arr.dump(2) << '\n';
}

void write_estimate_csv(std::ostream& os, const std::vector<estimation::RoundtripReport>& rows) {
  os << "K_true,rho_true,K_hat,rho_hat,v_max,rp_max,K_ci_lo,K_ci_hi,rho_ci_lo,rho_ci_hi,"
        "n_assets,seed\n";
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    os << format_double(r.K_true) << ',' << format_double(r.rho_true) << ','
       << format_double(e.K_hat) << ',' << format_double(e.rho_hat) << ','
       << format_double(e.v_max_hat) << ',' << format_double(e.rp_max_hat) << ','
       << format_double(e.K_ci.lo) << ',' << format_double(e.K_ci.hi) << ','
       << format_double(e.rho_ci.lo) << ',' << format_double(e.rho_ci.hi) << ',' << r.n_assets
       << ',' << r.seed << '\n';
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rnelab::io
