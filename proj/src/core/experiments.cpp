#include "qfc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "qfc/control.hpp"
#include "qfc/entropy.hpp"
#include "qfc/observables.hpp"
#include "qfc/quadrature.hpp"
#include "qfc/steady.hpp"

#ifndef QFC_VERSION_STRING
#define QFC_VERSION_STRING "unknown"
#endif

namespace qfc {

namespace {

std::string cell(double v) { return format_real(v); }
std::string cell(long v) { return std::to_string(v); }
std::string cell(int v) { return std::to_string(v); }

std::string perm_string(const std::vector<int>& p) {
  std::string s;
  for (int v : p) s += static_cast<char>('0' + v);
  return s;
}

// Runs body(i) for i in [0, n) on up to `threads` workers; body must only
// write to slot i of its outputs.
template <class F>
void parallel_for(int n, int threads, F body) {
  threads = std::clamp(threads, 1, std::max(n, 1));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int i = next++; i < n; i = next++) body(i);
      } catch (...) {
        errors[static_cast<size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SmeParams params_for(const ExperimentConfig& cfg, double kb, std::uint64_t seed) {
  SmeParams p;
  p.k = kb;
  p.beta = 1.0;
  p.dt = cfg.dt / (kb + 1.0);
  p.seed = seed;
  p.validate();
  return p;
}

ExperimentOutput run_fig1a(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Table t{"fig1a", {"k_over_beta", "z", "p_analytic", "p_empirical"}, {}};
  long clamps_total = 0;
  const double width = 2.0 / cfg.n_bins;
  for (size_t i = 0; i < cfg.k_over_beta.size(); ++i) {
    const double kb = cfg.k_over_beta[i];
    const SmeParams prm = params_for(cfg, kb, derive_seed(cfg.seed, i));
    const long steps = std::lround(cfg.t_final / prm.dt);
    const long burn = std::lround(cfg.burn_in * static_cast<double>(steps));
    std::vector<std::vector<long>> counts(static_cast<size_t>(cfg.n_traj), std::vector<long>(cfg.n_bins, 0));
    std::vector<long> clamps(static_cast<size_t>(cfg.n_traj), 0);
    parallel_for(cfg.n_traj, cfg.threads, [&](int j) {
      GaussianSource noise(derive_seed(prm.seed, j));
      TrajectoryCounters ctr;
      auto& c = counts[static_cast<size_t>(j)];
      double z = 0.0;
      for (long s = 0; s < steps; ++s) {
        z = qubit_z_step(z, prm, noise, &ctr);
        if (s >= burn && (s - burn) % cfg.sample_stride == 0) {
          const int b = std::clamp(static_cast<int>((z + 1.0) / width), 0, cfg.n_bins - 1);
          ++c[static_cast<size_t>(b)];
        }
      }
      clamps[static_cast<size_t>(j)] = ctr.clamp_events;
    });
    std::vector<long> total(static_cast<size_t>(cfg.n_bins), 0);
    for (const auto& c : counts)
      for (int b = 0; b < cfg.n_bins; ++b) total[static_cast<size_t>(b)] += c[static_cast<size_t>(b)];
    const double n = static_cast<double>(std::accumulate(total.begin(), total.end(), 0L));
    const SteadyDensity p = p_ss_nofb(kb, 1.0);
    double l1 = 0.0;
    for (int b = 0; b < cfg.n_bins; ++b) {
      const double lo = -1.0 + b * width;
      const double hi = b + 1 == cfg.n_bins ? 1.0 : lo + width;
      const double analytic = integrate([&p](double z) { return p(z); }, lo, hi, 1e-10) / (hi - lo);
      const double empirical = total[static_cast<size_t>(b)] / (n * (hi - lo));
      l1 += std::abs(analytic - empirical) * (hi - lo);
      t.rows.push_back({cell(kb), cell(0.5 * (lo + hi)), cell(analytic), cell(empirical)});
    }
    for (long c : clamps) clamps_total += c;
    out.diagnostics["l1_k_over_beta_" + format_real(kb)] = l1;
  }
  out.diagnostics["clamp_events"] = static_cast<double>(clamps_total);
  out.tables.push_back(std::move(t));
  return out;
}

ExperimentOutput run_fig1b(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Table main{"fig1b",
             {"k_over_beta", "P_commuting_ideal", "stderr_commuting_ideal", "P_commuting_mu", "stderr_commuting_mu",
              "eps_commuting_mu", "P_unbiased_ideal", "stderr_unbiased_ideal", "P_unbiased_mu", "stderr_unbiased_mu",
              "P_unbiased_closed_form", "P_commuting_ideal_analytic", "unbiased_gap", "stderr_unbiased_gap"},
             {}};
  Table search{"fig1b_eps_search", {"k_over_beta", "eps", "P_search", "stderr_search", "trigger_rate"}, {}};
  ClosedLoopOptions opt;
  opt.burn_in_fraction = cfg.burn_in;
  opt.threads = cfg.threads;
  long psd = 0;
  double align = 0.0;
  for (size_t i = 0; i < cfg.k_over_beta.size(); ++i) {
    const double kb = cfg.k_over_beta[i];
    const std::uint64_t base = derive_seed(cfg.seed, i);
    const double mu = cfg.mu_over_k * kb;
    auto run = [&](FeedbackMode mode, double m, double eps, std::uint64_t stream, double t_final) {
      FeedbackConfig fc;
      fc.mode = mode;
      fc.mu = m;
      fc.threshold_eps = eps;
      const ClosedLoopResult r =
          run_closed_loop(fc, params_for(cfg, kb, derive_seed(base, stream)), t_final, cfg.n_traj, opt);
      psd += r.psd_violations;
      align = std::max(align, r.max_alignment_error);
      return r;
    };
    const auto inf = std::numeric_limits<double>::infinity();
    const ClosedLoopResult ci = run(FeedbackMode::commuting, inf, 0.0, 0, cfg.t_final);
    // common random numbers for the two unbiased variants
    const ClosedLoopResult ui = run(FeedbackMode::unbiased, inf, 0.0, 1, cfg.t_final);
    const ClosedLoopResult um = run(FeedbackMode::unbiased, mu, 0.0, 1, cfg.t_final);

    // threshold search on shorter runs, then an independent re-run at the winner
    double best_eps = cfg.eps_grid.front();
    double best_p = -1.0;
    for (double eps : cfg.eps_grid) {
      const ClosedLoopResult r = run(FeedbackMode::commuting, mu, eps, 2, cfg.search_fraction * cfg.t_final);
      search.rows.push_back({cell(kb), cell(eps), cell(r.mean_success), cell(r.stderr_success), cell(r.trigger_rate)});
      if (r.mean_success > best_p || (r.mean_success == best_p && eps < best_eps)) {
        best_p = r.mean_success;
        best_eps = eps;
      }
    }
    const ClosedLoopResult cm = run(FeedbackMode::commuting, mu, best_eps, 3, cfg.t_final);

    // ideal minus finite-mu unbiased, paired per trajectory
    double gap = 0.0;
    double gap_ss = 0.0;
    const size_t n = ui.per_trajectory.size();
    for (size_t j = 0; j < n; ++j) gap += (ui.per_trajectory[j] - um.per_trajectory[j]) / static_cast<double>(n);
    for (size_t j = 0; j < n; ++j) gap_ss += std::pow(ui.per_trajectory[j] - um.per_trajectory[j] - gap, 2);
    const double gap_se = std::sqrt(gap_ss / static_cast<double>((n - 1) * n));

    main.rows.push_back({cell(kb), cell(ci.mean_success), cell(ci.stderr_success), cell(cm.mean_success),
                         cell(cm.stderr_success), cell(best_eps), cell(ui.mean_success), cell(ui.stderr_success),
                         cell(um.mean_success), cell(um.stderr_success), cell(unbiased_qubit_success(kb, 1.0)),
                         cell(mean_success(p_ss_fb(kb, 1.0, 0.0, GridSpec{2}))), cell(gap), cell(gap_se)});
  }
  out.diagnostics["psd_violations"] = static_cast<double>(psd);
  out.diagnostics["max_alignment_error"] = align;
  out.tables.push_back(std::move(main));
  out.tables.push_back(std::move(search));
  return out;
}

ExperimentOutput run_eps_sweep(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Table rows{"eps_sweep",
             {"dim", "sample", "mub", "permutation", "best_eps", "best_rate", "rate_unbiased", "interior",
              "branch_ambiguous"},
             {}};
  Table summary{"eps_sweep_summary",
                {"dim", "n_states", "n_interior_states", "fraction_interior", "n_pairs", "n_interior_pairs"},
                {}};
  std::vector<double> grid(static_cast<size_t>(cfg.eps_points));
  for (int i = 0; i < cfg.eps_points; ++i) grid[static_cast<size_t>(i)] = static_cast<double>(i) / (cfg.eps_points - 1);
  grid.back() = 1.0;

  for (int dim : cfg.dims) {
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(dim)));
    const Observable x = jz_observable(dim);
    const MubFamily fam = mub_family(dim);
    long interior_states = 0;
    long pairs = 0;
    long interior_pairs = 0;
    for (int s = 0; s < cfg.n_states; ++s) {
      const DensityMatrix rho = random_density(dim, HilbertSchmidt{}, rng);
      bool any = false;
      for (int b = 1; b < fam.count(); ++b) {
        std::vector<int> perm(static_cast<size_t>(dim));
        std::iota(perm.begin(), perm.end(), 0);
        if (cfg.permutation_search) perm = best_unbiased_permutation(rho, x, fam.bases[static_cast<size_t>(b)]).permutation;
        ComplexMatrix target(dim);
        for (int r = 0; r < dim; ++r)
          for (int c = 0; c < dim; ++c) target(r, c) = fam.bases[static_cast<size_t>(b)](r, perm[static_cast<size_t>(c)]);
        const SweepResult sw = entropy_rate_sweep(rho, x, UnitaryMatrix::trusted(target), grid);
        const double at_one = sw.curve.back().rate;
        const bool interior = sw.best_eps < 1.0 && at_one - sw.best_rate > 1e-10 * std::max(1.0, std::abs(at_one));
        any = any || interior;
        ++pairs;
        interior_pairs += interior;
        rows.rows.push_back({cell(dim), cell(s), cell(b), perm_string(perm), cell(sw.best_eps), cell(sw.best_rate),
                             cell(at_one), cell(interior ? 1 : 0), cell(sw.branch_ambiguous ? 1 : 0)});
      }
      interior_states += any;
    }
    const double frac = static_cast<double>(interior_states) / cfg.n_states;
    summary.rows.push_back({cell(dim), cell(cfg.n_states), cell(interior_states), cell(frac), cell(pairs),
                            cell(interior_pairs)});
    out.diagnostics["fraction_interior_dim" + std::to_string(dim)] = frac;
  }
  out.tables.push_back(std::move(rows));
  out.tables.push_back(std::move(summary));
  return out;
}

ExperimentOutput run_mub_audit(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Table t{"mub_audit", {"dim", "mub", "permutation", "j", "coupling", "J"}, {}};
  Table summary{"mub_audit_summary", {"dim", "mub", "n_permutations", "n_distinct_rows", "n_distinct_multisets", "unequal_within_row",
                               "J_min", "J_max", "rate_min", "rate_max"},
                 {}};
  for (int dim : cfg.dims) {
    const Observable x = jz_observable(dim);
    const MubFamily fam = mub_family(dim);
    // distinct spectrum so the eigenbasis of rho is the computational basis
    std::vector<double> pops(static_cast<size_t>(dim));
    for (int j = 0; j < dim; ++j) pops[static_cast<size_t>(j)] = static_cast<double>(2 * (dim - j)) / (dim * (dim + 1));
    const DensityMatrix rho = DensityMatrix::diagonal(pops);
    long distinct_total = 0;
    long distinct_rows = 0;
    bool any_unequal = false;
    for (int b = 1; b < fam.count(); ++b) {
      std::vector<int> perm(static_cast<size_t>(dim));
      std::iota(perm.begin(), perm.end(), 0);
      // rows keep the j order; multisets forget it
      std::set<std::vector<long long>> rows;
      std::set<std::vector<long long>> multisets;
      bool unequal = false;
      double rmin = 1e300;
      double rmax = -1e300;
      double jmin = 1e300;
      double jmax = -1e300;
      int n_perm = 0;
      do {
        const Observable xu = unbiased_observable(rho, x, fam.bases[static_cast<size_t>(b)], perm);
        const CouplingRow row = coupling_row(xu, rho.eigen().vectors);
        std::vector<long long> key;
        for (size_t j = 0; j < row.couplings.size(); ++j) {
          t.rows.push_back({cell(dim), cell(b), perm_string(perm), cell(static_cast<int>(j + 1)),
                            cell(row.couplings[j]), cell(row.mean)});
          key.push_back(std::llround(row.couplings[j] * 1e9));
        }
        rows.insert(key);
        std::sort(key.begin(), key.end());
        multisets.insert(key);
        if (key.back() != key.front()) unequal = true;
        const double rate = exact_mean_entropy_rate(rho, xu.matrix(), 1.0);
        rmin = std::min(rmin, rate);
        rmax = std::max(rmax, rate);
        jmin = std::min(jmin, row.mean);
        jmax = std::max(jmax, row.mean);
        ++n_perm;
      } while (std::next_permutation(perm.begin(), perm.end()));
      summary.rows.push_back({cell(dim), cell(b), cell(n_perm), cell(static_cast<int>(rows.size())),
                              cell(static_cast<int>(multisets.size())), cell(unequal ? 1 : 0), cell(jmin), cell(jmax),
                              cell(rmin), cell(rmax)});
      distinct_total = std::max(distinct_total, static_cast<long>(multisets.size()));
      distinct_rows = std::max(distinct_rows, static_cast<long>(rows.size()));
      any_unequal = any_unequal || unequal;
    }
    out.diagnostics["max_distinct_multisets_dim" + std::to_string(dim)] = static_cast<double>(distinct_total);
    out.diagnostics["max_distinct_rows_dim" + std::to_string(dim)] = static_cast<double>(distinct_rows);
    out.diagnostics["unequal_couplings_dim" + std::to_string(dim)] = any_unequal ? 1.0 : 0.0;
  }
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(summary));
  return out;
}

ExperimentOutput run_steady_curve(const ExperimentConfig& cfg) {
  ExperimentOutput out;
  Table curve{"steady_curve", {"k_over_beta", "eps", "mean_success"}, {}};
  Table summary{"steady_curve_summary",
                {"k_over_beta", "eps_star", "P_eps_star", "P_unbiased_closed_form", "P_rule_of_thumb",
                 "rule_of_thumb_valid", "non_increasing"},
                {}};
  std::vector<double> grid = cfg.eps_grid;
  std::sort(grid.begin(), grid.end());
  for (double kb : cfg.k_over_beta) {
    const EpsilonOptimum o = optimize_epsilon(kb, 1.0, grid);
    bool mono = true;
    for (size_t i = 0; i < o.eps.size(); ++i) {
      curve.rows.push_back({cell(kb), cell(o.eps[i]), cell(o.success[i])});
      if (i > 0 && o.success[i] > o.success[i - 1]) mono = false;
    }
    const AnalyticPerformance a = analytic_performance(kb, 1.0, 1.0, 2);
    summary.rows.push_back({cell(kb), cell(o.eps_star), cell(o.best_success), cell(a.unbiased_qubit),
                            cell(a.rule_of_thumb), cell(a.rule_of_thumb_valid ? 1 : 0), cell(mono ? 1 : 0)});
  }
  out.tables.push_back(std::move(curve));
  out.tables.push_back(std::move(summary));
  return out;
}

std::string csv_text(const Table& t) {
  std::string s;
  for (size_t i = 0; i < t.header.size(); ++i) s += (i ? "," : "") + t.header[i];
  s += '\n';
  for (const auto& row : t.rows) {
    for (size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + row[i];
    s += '\n';
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
  f << text;
  f.close();
  if (!f) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

PermutationChoice best_unbiased_permutation(const DensityMatrix& rho, const Observable& x,
                                            const UnitaryMatrix& mub_basis) {
  std::vector<int> perm(static_cast<size_t>(rho.dim()));
  std::iota(perm.begin(), perm.end(), 0);
  PermutationChoice best{perm, 0.0};
  bool first = true;
  do {
    const double rate = exact_mean_entropy_rate(rho, unbiased_observable(rho, x, mub_basis, perm), 1.0);
    if (first || std::abs(rate) > std::abs(best.rate)) {
      best = {perm, rate};
      first = false;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::string library_version() { return QFC_VERSION_STRING; }

ExperimentOutput compute_experiment(const ExperimentConfig& cfg) {
  switch (cfg.experiment) {
    case Experiment::fig1a:
      return run_fig1a(cfg);
    case Experiment::fig1b:
      return run_fig1b(cfg);
    case Experiment::eps_sweep:
      return run_eps_sweep(cfg);
    case Experiment::mub_audit:
      return run_mub_audit(cfg);
    case Experiment::steady_curve:
      return run_steady_curve(cfg);
  }
  throw InvalidArgument("unknown experiment");
}

RunReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  const ExperimentOutput result = compute_experiment(cfg);

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory '" + out_dir + "': " + ec.message());

  RunReport report;
  std::vector<fs::path> finals;
  std::vector<fs::path> partials;
  auto cleanup = [&] {
    for (const auto& p : partials) fs::remove(p, ec);
    for (const auto& p : finals) fs::remove(p, ec);
  };
  try {
    std::vector<std::pair<fs::path, std::string>> files;
    for (const Table& t : result.tables) files.emplace_back(fs::path(out_dir) / (t.name + ".csv"), csv_text(t));

    nlohmann::ordered_json m;
    m["experiment"] = experiment_name(cfg.experiment);
    m["version"] = library_version();
    m["seed"] = cfg.seed;
    m["config_text"] = render_config(cfg);
    m["explicit_keys"] = cfg.explicit_keys;
    m["units"] = "rates in units of beta; t_final in 1/beta; dt is (k + beta) times the time step";
    for (const auto& [path, text] : files) m["outputs"].push_back(path.filename().string());
    nlohmann::ordered_json diag = nlohmann::ordered_json::object();
    for (const auto& [k, v] : result.diagnostics) diag[k] = v;
    m["diagnostics"] = diag;
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    m["wall_time_s"] = report.wall_time_s;
    files.emplace_back(fs::path(out_dir) / (experiment_name(cfg.experiment) + "_manifest.json"), m.dump(2) + "\n");

    for (const auto& [path, text] : files) {
      fs::path tmp = path;
      tmp += ".partial";
      partials.push_back(tmp);
      write_file(tmp, text);
    }
    for (size_t i = 0; i < files.size(); ++i) {
      fs::rename(partials[i], files[i].first);
      finals.push_back(files[i].first);
      report.files.push_back(files[i].first.string());
    }
    partials.clear();
  } catch (const fs::filesystem_error& e) {
    cleanup();
    throw IoError(e.what());
  } catch (...) {
    cleanup();
    throw;
  }
  return report;
}

}  // namespace qfc
