#include "rnelab/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rnelab::config {

namespace {

std::string fmt(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double to_double(const std::string& v, std::size_t line) {
  if (v.empty()) throw ConfigError(line, "missing value");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || errno == ERANGE)
    throw ConfigError(line, "not a number: '" + v + "'");
  return x;
}

std::uint64_t to_u64(const std::string& v, std::size_t line) {
  if (v.empty()) throw ConfigError(line, "missing value");
  if (v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(line, "not a non-negative integer: '" + v + "'");
  errno = 0;
  const auto x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(line, "integer out of range: '" + v + "'");
  return x;
}

bool to_bool(const std::string& v, std::size_t line) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(line, "expected true or false, got '" + v + "'");
}

std::vector<double> to_list(const std::string& v, std::size_t line) {
  if (v.empty()) throw ConfigError(line, "missing value");
  std::vector<double> out;
  for (const auto& item : split(v, ',')) out.push_back(to_double(item, line));
  return out;
}

std::string list_str(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? ", " : "") + fmt(xs[i]);
  return s;
}

void check(bool ok, std::size_t line, const std::string& what) {
  if (!ok) throw ConfigError(line, what);
}

double positive(const std::string& v, std::size_t line) {
  const double x = to_double(v, line);
  check(std::isfinite(x) && x > 0.0, line, "value must be > 0");
  return x;
}

double nonneg(const std::string& v, std::size_t line) {
  const double x = to_double(v, line);
  check(std::isfinite(x) && x >= 0.0, line, "value must be >= 0");
  return x;
}

double prob(const std::string& v, std::size_t line) {
  const double x = to_double(v, line);
  check(x > 0.0 && x < 1.0, line, "value must lie in (0, 1)");
  return x;
}

const char* law_name(market::OutcomeLaw l) {
  switch (l) {
    case market::OutcomeLaw::truth: return "truth";
    case market::OutcomeLaw::reference: return "reference";
    case market::OutcomeLaw::rne: return "rne";
  }
  return "truth";
}

const char* binning_name(market::Binning::Mode m) {
  return m == market::Binning::Mode::quantiles ? "quantiles" : "equal_width";
}

std::string schedule_str(const std::vector<inference::ScheduleSegment>& sched) {
  std::string s;
  for (std::size_t i = 0; i < sched.size(); ++i) {
    const auto& g = sched[i];
    s += (i ? "; " : "") + fmt(g.t_begin) + " " + fmt(g.t_end) + " " + fmt(g.sigma_lZ) + " " +
         fmt(g.sigma_lD);
  }
  return s;
}

std::vector<inference::ScheduleSegment> to_schedule(const std::string& v, std::size_t line) {
  std::vector<inference::ScheduleSegment> out;
  if (v.empty()) return out;
  for (const auto& seg : split(v, ';')) {
    if (seg.empty()) continue;
    std::istringstream is(seg);
    std::vector<std::string> parts;
    for (std::string w; is >> w;) parts.push_back(w);
    check(parts.size() == 4, line, "schedule segment needs 't_begin t_end sigma_lZ sigma_lD'");
    out.push_back({to_double(parts[0], line), to_double(parts[1], line),
                   to_double(parts[2], line), to_double(parts[3], line)});
  }
  return out;
}

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, std::size_t)> set;
};

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      {"market", "n_assets", [](const RunConfig& c) { return std::to_string(c.market.n_assets); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const auto n = to_u64(v, l);
         check(n >= 1, l, "n_assets must be >= 1");
         c.market.n_assets = n;
       }},
      {"market", "p1_0", [](const RunConfig& c) { return fmt(c.market.truth.p1_0); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.truth.p1_0 = prob(v, l); }},
      {"market", "rho", [](const RunConfig& c) { return fmt(c.market.truth.rho); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.truth.rho = positive(v, l); }},
      {"market", "sign_prob_plus", [](const RunConfig& c) { return fmt(c.market.sign_prob_plus); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.sign_prob_plus = prob(v, l); }},
      {"market", "record_times", [](const RunConfig& c) { return list_str(c.market.record_times); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         c.market.record_times = to_list(v, l);
         for (std::size_t i = 0; i < c.market.record_times.size(); ++i) {
           check(c.market.record_times[i] >= 0.0, l, "record times must be >= 0");
           if (i) check(c.market.record_times[i] > c.market.record_times[i - 1], l, "record times must increase");
         }
       }},
      {"market", "outcome_law", [](const RunConfig& c) { return std::string(law_name(c.market.outcome_law)); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         if (v == "truth") c.market.outcome_law = market::OutcomeLaw::truth;
         else if (v == "reference") c.market.outcome_law = market::OutcomeLaw::reference;
         else if (v == "rne") c.market.outcome_law = market::OutcomeLaw::rne;
         else throw ConfigError(l, "outcome_law must be truth, reference or rne");
       }},
      {"market", "max_work", [](const RunConfig& c) { return fmt(c.market.max_work); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.max_work = positive(v, l); }},

      {"pricing", "K", [](const RunConfig& c) { return fmt(c.market.pricing.K); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const double K = to_double(v, l);
         check(std::isfinite(K) && K >= 1.0, l, "K must be >= 1");
         c.market.pricing.K = K;
       }},
      {"pricing", "S_delta", [](const RunConfig& c) { return fmt(c.market.pricing.S_delta); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.pricing.S_delta = positive(v, l); }},
      {"pricing", "bsure_premium_drift", [](const RunConfig& c) { return fmt(c.market.pricing.bsure_premium_drift); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.pricing.bsure_premium_drift = nonneg(v, l); }},
      {"pricing", "rZ_delta", [](const RunConfig& c) { return fmt(c.market.pricing.rZ_delta); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.pricing.rZ_delta = nonneg(v, l); }},
      {"pricing", "sigma_Z", [](const RunConfig& c) { return fmt(c.market.pricing.sigma_Z); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.pricing.sigma_Z = nonneg(v, l); }},
      {"pricing", "horizon", [](const RunConfig& c) { return fmt(c.market.pricing.horizon); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.pricing.horizon = positive(v, l); }},
      {"pricing", "decaying_impact", [](const RunConfig& c) { return std::string(c.market.pricing.decaying_impact ? "true" : "false"); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.pricing.decaying_impact = to_bool(v, l); }},

      {"inference", "sigma_lZ", [](const RunConfig& c) { return fmt(c.market.inference.sigma_lZ); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.inference.sigma_lZ = nonneg(v, l); }},
      {"inference", "sigma_lD", [](const RunConfig& c) { return fmt(c.market.inference.sigma_lD); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.inference.sigma_lD = nonneg(v, l); }},
      {"inference", "dt", [](const RunConfig& c) { return fmt(c.market.inference.dt); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.inference.dt = positive(v, l); }},
      {"inference", "t_max", [](const RunConfig& c) { return fmt(c.market.inference.t_max); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.inference.t_max = positive(v, l); }},
      {"inference", "schedule", [](const RunConfig& c) { return schedule_str(c.market.inference.schedule); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.market.inference.schedule = to_schedule(v, l); }},

      {"analytics", "eval_time", [](const RunConfig& c) { return fmt(c.analytics.eval_time); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.analytics.eval_time = positive(v, l); }},
      {"analytics", "grid_points", [](const RunConfig& c) { return std::to_string(c.analytics.grid_points); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const auto n = to_u64(v, l);
         check(n >= 5 && n <= 10000000, l, "grid_points must lie in [5, 1e7]");
         c.analytics.grid_points = n;
       }},
      {"analytics", "rho_grid", [](const RunConfig& c) { return list_str(c.analytics.rho_grid); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         c.analytics.rho_grid = to_list(v, l);
         for (double r : c.analytics.rho_grid) check(std::isfinite(r) && r > 0.0, l, "rho_grid values must be > 0");
       }},
      {"analytics", "K_grid", [](const RunConfig& c) { return list_str(c.analytics.K_grid); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         c.analytics.K_grid = to_list(v, l);
         for (double k : c.analytics.K_grid) check(std::isfinite(k) && k >= 1.0, l, "K_grid values must be >= 1");
       }},
      {"analytics", "window_eps_p", [](const RunConfig& c) { return fmt(c.analytics.window_eps_p); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.analytics.window_eps_p = prob(v, l); }},
      {"analytics", "window_M_rho", [](const RunConfig& c) { return fmt(c.analytics.window_M_rho); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const double m = to_double(v, l);
         check(std::isfinite(m) && m > 1.0, l, "window_M_rho must be > 1");
         c.analytics.window_M_rho = m;
       }},

      {"estimation", "n_min", [](const RunConfig& c) { return std::to_string(c.estimation.n_min); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const auto n = to_u64(v, l);
         check(n >= 2, l, "n_min must be >= 2");
         c.estimation.n_min = n;
       }},
      {"estimation", "bins", [](const RunConfig& c) { return std::to_string(c.estimation.bins); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const auto n = to_u64(v, l);
         check(n >= 5, l, "bins must be >= 5");
         c.estimation.bins = n;
       }},
      {"estimation", "binning", [](const RunConfig& c) { return std::string(binning_name(c.estimation.binning)); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         if (v == "equal_width") c.estimation.binning = market::Binning::Mode::equal_width;
         else if (v == "quantiles") c.estimation.binning = market::Binning::Mode::quantiles;
         else throw ConfigError(l, "binning must be equal_width or quantiles");
       }},
      {"estimation", "bootstrap", [](const RunConfig& c) { return std::to_string(c.estimation.bootstrap); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.estimation.bootstrap = to_u64(v, l); }},
      {"estimation", "ci_level", [](const RunConfig& c) { return fmt(c.estimation.ci_level); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.estimation.ci_level = prob(v, l); }},

      {"run", "seed", [](const RunConfig& c) { return std::to_string(c.run.seed); },
       [](RunConfig& c, const std::string& v, std::size_t l) { c.run.seed = to_u64(v, l); }},
      {"run", "threads", [](const RunConfig& c) { return std::to_string(c.run.threads); },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         const auto n = to_u64(v, l);
         check(n >= 1 && n <= 1024, l, "threads must lie in [1, 1024]");
         c.run.threads = static_cast<unsigned>(n);
         c.market.threads = c.run.threads;
       }},
      {"run", "out_dir", [](const RunConfig& c) { return c.run.out_dir; },
       [](RunConfig& c, const std::string& v, std::size_t l) {
         check(!v.empty(), l, "missing value");
         c.run.out_dir = v;
       }},
  };
  return table;
}

struct DerivedField {
  const char* key;
  double Derived::*member;
};

constexpr DerivedField kDerivedFields[] = {
    {"pi0", &Derived::pi0},         {"Pi0_plus", &Derived::Pi0_plus},
    {"Pi0_minus", &Derived::Pi0_minus}, {"sigma_l", &Derived::sigma_l},
    {"t_p", &Derived::t_p},         {"t_rho", &Derived::t_rho},
    {"t_K", &Derived::t_K},
};

bool agrees(double echoed, double recomputed) {
  if (echoed == recomputed) return true;
  if (!std::isfinite(echoed) || !std::isfinite(recomputed)) return false;
  return std::abs(echoed - recomputed) <= 1e-12 * std::max(1.0, std::abs(recomputed));
}

}  // namespace

ConfigError::ConfigError(std::size_t line, const std::string& what)
    : InputError(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

RunConfig::RunConfig() {
  market.n_assets = 10000;
  market.truth.p1_0 = 0.49;
  market.truth.rho = 9.0;
  market.pricing.K = 1.5;
  market.pricing.S_delta = 1.0;
  market.inference.sigma_lZ = 0.0;
  market.inference.sigma_lD = 0.5;
  market.inference.dt = 0.05;
  market.inference.t_max = 10.0;
  market.record_times = {2.5};
  market.threads = run.threads;
}

void RunConfig::validate() const {
  try {
    market.validate();
  } catch (const InputError& e) {
    throw ConfigError(0, e.what());
  }
  bool found = false;
  for (double t : market.record_times)
    if (std::abs(t - analytics.eval_time) <= 1e-12 * std::max(1.0, t)) found = true;
  if (!found) throw ConfigError(0, "analytics.eval_time must be one of market.record_times");
  if (analytics.rho_grid.empty() || analytics.K_grid.empty())
    throw ConfigError(0, "analytics grids must not be empty");
  if (market.threads != run.threads) throw ConfigError(0, "thread budget mismatch");
}

Derived RunConfig::derived() const {
  Derived d;
  d.pi0 = market.reference_prior();
  d.Pi0_plus = market.rne_prior(+1);
  d.Pi0_minus = market.rne_prior(-1);
  const double t = analytics.eval_time;
  d.sigma_l = std::sqrt(market.inference.cumulative_variance(t) / t);
  if (d.sigma_l > 0.0) {
    const auto m = anomaly_params().milestones();
    d.t_p = m.t_p;
    d.t_rho = m.t_rho;
    d.t_K = m.t_K;
  } else {
    d.t_p = d.t_rho = d.t_K = std::numeric_limits<double>::infinity();
  }
  return d;
}

anomaly::AnomalyParams RunConfig::anomaly_params() const {
  anomaly::AnomalyParams ap;
  ap.rho = market.truth.rho;
  ap.K = market.pricing.K;
  ap.S_delta = market.pricing.S_delta;
  ap.H_p = -logit(market.truth.p1_0);
  ap.t = analytics.eval_time;
  ap.sigma_l = std::sqrt(market.inference.cumulative_variance(ap.t) / ap.t);
  return ap;
}

market::Binning RunConfig::binning() const {
  market::Binning b;
  b.mode = estimation.binning;
  b.bins = estimation.bins;
  return b;
}

RunConfig parse_config(std::string_view text) {
  RunConfig c;
  std::map<std::string, std::map<std::string, const Field*>> index;
  for (const auto& f : fields()) index[f.section][f.key] = &f;

  std::set<std::string> seen;
  std::vector<std::pair<std::string, std::pair<double, std::size_t>>> derived_echo;
  std::string section;
  std::size_t line_no = 0;
  std::istringstream is{std::string(text)};
  for (std::string raw; std::getline(is, raw);) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "derived" && !index.count(section))
        throw ConfigError(line_no, "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError(line_no, "key '" + key + "' outside any section");
    if (!seen.insert(section + "." + key).second)
      throw ConfigError(line_no, "duplicate key " + section + "." + key);
    if (section == "derived") {
      bool known = false;
      for (const auto& df : kDerivedFields) known = known || key == df.key;
      if (!known) throw ConfigError(line_no, "unknown key derived." + key);
      derived_echo.push_back({key, {to_double(value, line_no), line_no}});
      continue;
    }
    const auto& keys = index[section];
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError(line_no, "unknown key " + section + "." + key);
    it->second->set(c, value, line_no);
  }
  c.market.threads = c.run.threads;
  c.validate();

  if (!derived_echo.empty()) {
    const Derived d = c.derived();
    for (const auto& [key, val] : derived_echo) {
      for (const auto& df : kDerivedFields) {
        if (key != df.key) continue;
        if (!agrees(val.first, d.*df.member))
          throw ConfigError(val.second, "derived." + key + " = " + fmt(val.first) +
                                            " disagrees with recomputed " + fmt(d.*df.member));
      }
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo_config(const RunConfig& c) {
  std::ostringstream os;
  std::string section;
  for (const auto& f : fields()) {
    if (section != f.section) {
      if (!section.empty()) os << '\n';
      section = f.section;
      os << '[' << section << "]\n";
    }
    os << f.key << " = " << f.get(c) << '\n';
  }
  const Derived d = c.derived();
  os << "\n[derived]\n";
  for (const auto& df : kDerivedFields) os << df.key << " = " << fmt(d.*df.member) << '\n';
  return os.str();
}

}  // namespace rnelab::config
