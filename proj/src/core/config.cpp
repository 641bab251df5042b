#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "qfc/errors.hpp"
#include "qfc/experiments.hpp"

namespace qfc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad(const std::string& key, int line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": key '" << key << "': " << what;
  throw ConfigError(os.str(), key, line);
}

double to_real(const std::string& key, int line, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || std::isnan(v)) {
    bad(key, line, "expected a real number, got '" + t + "'");
  }
  return v;
}

long long to_int(const std::string& key, int line, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    bad(key, line, "expected an integer, got '" + t + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& key, int line, const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size()) {
    bad(key, line, "expected a non-negative 64-bit integer, got '" + t + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& key, int line, const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (out.empty() || std::any_of(out.begin(), out.end(), [](const std::string& s) { return s.empty(); })) {
    bad(key, line, "expected a comma separated list without empty entries");
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
  return v;
}

ExperimentConfig defaults(Experiment e) {
  ExperimentConfig c;
  c.experiment = e;
  switch (e) {
    case Experiment::fig1a:
      c.k_over_beta = {0.1, 0.5, 2.0};
      c.n_traj = 8;
      c.t_final = 2000.0;
      c.dt = 2e-4;
      c.burn_in = 0.05;
      c.n_bins = 50;
      c.sample_stride = 10;
      break;
    case Experiment::fig1b:
      c.k_over_beta = {1.0, 2.0, 5.0, 10.0};
      c.n_traj = 8;
      c.t_final = 10.0;
      c.dt = 1e-4;
      c.burn_in = 0.2;
      c.mu_over_k = 100.0;
      c.eps_grid = linspace(0.0, 0.5, 6);
      c.search_fraction = 0.25;
      break;
    case Experiment::eps_sweep:
      c.dims = {2, 3, 4};
      c.n_states = 1000;
      c.eps_points = 101;
      c.permutation_search = true;
      break;
    case Experiment::mub_audit:
      c.dims = {2, 3, 4};
      break;
    case Experiment::steady_curve:
      c.k_over_beta = {0.5, 1.0, 2.0, 5.0, 10.0};
      c.eps_grid = linspace(0.0, 0.5, 21);
      break;
  }
  return c;
}

}  // namespace

Experiment parse_experiment(const std::string& name) {
  if (name == "fig1a") return Experiment::fig1a;
  if (name == "fig1b") return Experiment::fig1b;
  if (name == "eps_sweep") return Experiment::eps_sweep;
  if (name == "mub_audit") return Experiment::mub_audit;
  if (name == "steady_curve") return Experiment::steady_curve;
  throw InvalidArgument("unknown experiment '" + name + "' (expected fig1a, fig1b, eps_sweep, mub_audit or steady_curve)");
}

std::string experiment_name(Experiment e) {
  switch (e) {
    case Experiment::fig1a:
      return "fig1a";
    case Experiment::fig1b:
      return "fig1b";
    case Experiment::eps_sweep:
      return "eps_sweep";
    case Experiment::mub_audit:
      return "mub_audit";
    case Experiment::steady_curve:
      return "steady_curve";
  }
  return "?";
}

std::vector<std::string> config_keys(Experiment e) {
  std::vector<std::string> keys{"experiment", "seed", "output_path"};
  switch (e) {
    case Experiment::fig1a:
      keys.insert(keys.end(), {"k_over_beta", "n_traj", "t_final", "dt", "burn_in", "n_bins", "sample_stride", "threads"});
      break;
    case Experiment::fig1b:
      keys.insert(keys.end(), {"k_over_beta", "n_traj", "t_final", "dt", "burn_in", "mu_over_k", "eps_grid",
                               "search_fraction", "threads"});
      break;
    case Experiment::eps_sweep:
      keys.insert(keys.end(), {"dims", "n_states", "eps_points", "permutation_search"});
      break;
    case Experiment::mub_audit:
      keys.insert(keys.end(), {"dims"});
      break;
    case Experiment::steady_curve:
      keys.insert(keys.end(), {"k_over_beta", "eps_grid"});
      break;
  }
  return keys;
}

ExperimentConfig parse_config(Experiment e, const std::string& text) {
  ExperimentConfig c = defaults(e);
  const std::vector<std::string> allowed = config_keys(e);
  static const std::set<std::string> all_keys = [] {
    std::set<std::string> s;
    for (Experiment x : {Experiment::fig1a, Experiment::fig1b, Experiment::eps_sweep, Experiment::mub_audit,
                         Experiment::steady_curve}) {
      for (const auto& k : config_keys(x)) s.insert(k);
    }
    return s;
  }();

  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      std::ostringstream os;
      os << "config line " << line << ": expected 'key = value', got '" << body << "'";
      throw ConfigError(os.str(), {}, line);
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (key.empty()) {
      std::ostringstream os;
      os << "config line " << line << ": missing key before '='";
      throw ConfigError(os.str(), {}, line);
    }
    if (!all_keys.count(key)) bad(key, line, "unknown key");
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      bad(key, line, "not used by experiment '" + experiment_name(e) + "'");
    }
    if (!seen.insert(key).second) bad(key, line, "duplicate key");
    if (value.empty()) bad(key, line, "missing value");

    auto positive = [&](double v) {
      if (!(v > 0.0)) bad(key, line, "must be > 0");
      return v;
    };
    auto at_least = [&](long long v, long long lo) {
      if (v < lo) bad(key, line, "must be >= " + std::to_string(lo));
      if (v > 1000000000LL) bad(key, line, "is unreasonably large");
      return static_cast<int>(v);
    };

    if (key == "experiment") {
      if (value != experiment_name(e)) {
        bad(key, line, "config is for '" + value + "' but experiment '" + experiment_name(e) + "' was requested");
      }
    } else if (key == "seed") {
      c.seed = to_u64(key, line, value);
    } else if (key == "output_path") {
      c.output_path = value;
    } else if (key == "k_over_beta") {
      c.k_over_beta.clear();
      for (const auto& item : split_list(key, line, value)) {
        const double v = to_real(key, line, item);
        if (!(v > 0.0) || !std::isfinite(v)) bad(key, line, "entries must be finite and > 0");
        c.k_over_beta.push_back(v);
      }
    } else if (key == "n_traj") {
      c.n_traj = at_least(to_int(key, line, value), 2);
    } else if (key == "t_final") {
      c.t_final = positive(to_real(key, line, value));
      if (!std::isfinite(c.t_final)) bad(key, line, "must be finite");
    } else if (key == "dt") {
      c.dt = positive(to_real(key, line, value));
      if (c.dt > 0.01) bad(key, line, "must be <= 0.01 (it is (k + beta) times the time step)");
    } else if (key == "burn_in") {
      c.burn_in = to_real(key, line, value);
      if (!(c.burn_in >= 0.0 && c.burn_in < 1.0)) bad(key, line, "must lie in [0, 1)");
    } else if (key == "mu_over_k") {
      c.mu_over_k = positive(to_real(key, line, value));
    } else if (key == "dims") {
      c.dims.clear();
      for (const auto& item : split_list(key, line, value)) {
        const long long d = to_int(key, line, item);
        if (d < 2 || d > 4) bad(key, line, "dimensions must be 2, 3 or 4");
        c.dims.push_back(static_cast<int>(d));
      }
    } else if (key == "n_states") {
      c.n_states = at_least(to_int(key, line, value), 1);
    } else if (key == "n_bins") {
      c.n_bins = at_least(to_int(key, line, value), 2);
    } else if (key == "sample_stride") {
      c.sample_stride = at_least(to_int(key, line, value), 1);
    } else if (key == "eps_grid") {
      c.eps_grid.clear();
      for (const auto& item : split_list(key, line, value)) {
        const double v = to_real(key, line, item);
        if (!(v >= 0.0 && v < 1.0)) bad(key, line, "entries must lie in [0, 1)");
        c.eps_grid.push_back(v);
      }
      if (e == Experiment::steady_curve &&
          std::find(c.eps_grid.begin(), c.eps_grid.end(), 0.0) == c.eps_grid.end()) {
        bad(key, line, "must contain 0");
      }
    } else if (key == "search_fraction") {
      c.search_fraction = to_real(key, line, value);
      if (!(c.search_fraction > 0.0 && c.search_fraction <= 1.0)) bad(key, line, "must lie in (0, 1]");
    } else if (key == "eps_points") {
      c.eps_points = at_least(to_int(key, line, value), 2);
    } else if (key == "permutation_search") {
      if (value == "true" || value == "1") {
        c.permutation_search = true;
      } else if (value == "false" || value == "0") {
        c.permutation_search = false;
      } else {
        bad(key, line, "expected true or false");
      }
    } else if (key == "threads") {
      c.threads = at_least(to_int(key, line, value), 1);
    }
    c.explicit_keys.push_back(key);
  }
  return c;
}

ExperimentConfig load_config(Experiment e, const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_config(e, ss.str());
}

std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string render_config(const ExperimentConfig& c) {
  auto reals = [](const std::vector<double>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + format_real(v[i]);
    return s;
  };
  std::ostringstream os;
  for (const auto& key : config_keys(c.experiment)) {
    os << key << " = ";
    if (key == "experiment") os << experiment_name(c.experiment);
    else if (key == "seed") os << c.seed;
    else if (key == "output_path") os << c.output_path;
    else if (key == "k_over_beta") os << reals(c.k_over_beta);
    else if (key == "n_traj") os << c.n_traj;
    else if (key == "t_final") os << format_real(c.t_final);
    else if (key == "dt") os << format_real(c.dt);
    else if (key == "burn_in") os << format_real(c.burn_in);
    else if (key == "mu_over_k") os << format_real(c.mu_over_k);
    else if (key == "dims") {
      for (size_t i = 0; i < c.dims.size(); ++i) os << (i ? ", " : "") << c.dims[i];
    } else if (key == "n_states") os << c.n_states;
    else if (key == "n_bins") os << c.n_bins;
    else if (key == "sample_stride") os << c.sample_stride;
    else if (key == "eps_grid") os << reals(c.eps_grid);
    else if (key == "search_fraction") os << format_real(c.search_fraction);
    else if (key == "eps_points") os << c.eps_points;
    else if (key == "permutation_search") os << (c.permutation_search ? "true" : "false");
    else if (key == "threads") os << c.threads;
    os << '\n';
  }
  return os.str();
}

}  // namespace qfc
