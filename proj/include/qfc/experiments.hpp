#pragma once

// Config-driven experiments behind the qfc command line tool.
//
// Config files are flat "key = value" lines; '#' starts a comment; lists
// are comma separated. Rates are in units of beta (beta = 1), so
// k_over_beta is the measurement strength and times (t_final) are in units
// of 1/beta. The time step `dt` is dimensionless: the integrator uses
// dt / (k + beta) for each k/beta.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qfc/observables.hpp"

namespace qfc {

enum class Experiment { fig1a, fig1b, eps_sweep, mub_audit, steady_curve };

Experiment parse_experiment(const std::string& name);
std::string experiment_name(Experiment e);

struct ExperimentConfig {
  Experiment experiment = Experiment::fig1a;
  std::vector<double> k_over_beta;
  std::uint64_t seed = 1;
  int n_traj = 8;
  double t_final = 0.0;
  double dt = 0.0;
  double burn_in = 0.2;
  double mu_over_k = 100.0;
  std::vector<int> dims;
  int n_states = 1000;
  int n_bins = 50;
  int sample_stride = 10;
  std::vector<double> eps_grid;
  double search_fraction = 0.25;
  int eps_points = 101;
  bool permutation_search = true;
  int threads = 1;
  std::string output_path = ".";

  // Keys read from the file (or set explicitly); echoed in the manifest.
  std::vector<std::string> explicit_keys;
};

// Keys accepted by an experiment, in manifest order.
std::vector<std::string> config_keys(Experiment e);

// Defaults for `e`, then the assignments in `text`. Throws ConfigError
// naming the key and 1-based line for unknown keys, keys that do not apply
// to the experiment, duplicates, malformed values and values out of range.
// An `experiment` key, if present, must agree with `e`.
ExperimentConfig parse_config(Experiment e, const std::string& text);
ExperimentConfig load_config(Experiment e, const std::string& path);

// "key = value" lines for every key of the experiment, full precision, so
// the text re-parses to the same configuration.
std::string render_config(const ExperimentConfig& cfg);

struct Table {
  std::string name;  // file stem
  std::vector<std::string> header;
  // Cells are preformatted (17 significant digits for reals).
  std::vector<std::vector<std::string>> rows;
};

struct ExperimentOutput {
  std::vector<Table> tables;
  // Scalar diagnostics for the manifest (L1 distances, counters, ...).
  std::map<std::string, double> diagnostics;
};

// Pure computation; no files are touched.
ExperimentOutput compute_experiment(const ExperimentConfig& cfg);

struct RunReport {
  std::vector<std::string> files;  // CSVs then the manifest
  double wall_time_s = 0.0;
};

// compute_experiment, then writes <out_dir>/<table>.csv for every table and
// <out_dir>/<experiment>_manifest.json. Nothing is left behind on error.
RunReport run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

std::string format_real(double v);
std::string library_version();

struct PermutationChoice {
  std::vector<int> permutation;
  double rate = 0.0;  // exact mean entropy rate at k = 1
};

// Over all N! assignments of x's spectrum to the columns of V_rho * mub,
// the one with the largest |exact_mean_entropy_rate|; ties keep the
// lexicographically first permutation.
PermutationChoice best_unbiased_permutation(const DensityMatrix& rho, const Observable& x,
                                            const UnitaryMatrix& mub_basis);

}  // namespace qfc
