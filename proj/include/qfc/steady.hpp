#pragma once

// Stationary distributions of the qubit Bloch coordinate z under
// measurement of sigma_z (strength k) and isotropic noise (strength beta):
//   dz = -4 beta z dt + sqrt(8k) (1 - z^2) dW
// Without feedback the density is proportional to
//   f(z) = exp(-a / (1 - z^2)) / (1 - z^2)^2,   a = beta / (2k).
// With ideal threshold feedback (z <= -eps reflected to -z) the support is
// [-eps, 1], probability leaving at -eps re-enters at +eps.

#include <span>
#include <vector>

namespace qfc {

struct GridSpec {
  int nodes = 257;
};

class SteadyDensity {
 public:
  enum class Kind { no_feedback, feedback, tabulated };

  // Density sampled on a uniform grid; evaluation interpolates linearly.
  static SteadyDensity tabulated(std::vector<double> grid, std::vector<double> values);

  double operator()(double z) const;

  Kind kind() const { return kind_; }
  double k() const { return k_; }
  double beta() const { return beta_; }
  double eps() const { return eps_; }
  double support_lo() const { return lo_; }
  double support_hi() const { return hi_; }
  std::span<const double> grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  // Points inside the support where the density is not smooth.
  std::vector<double> kinks() const;
  // |integral of p over the support - 1|
  double norm_residual() const { return norm_residual_; }

 private:
  friend SteadyDensity p_ss_nofb(double, double, GridSpec);
  friend SteadyDensity p_ss_fb(double, double, double, GridSpec);
  friend double mean_success(const SteadyDensity&);

  double integral(double lo, double hi, bool weight_success) const;

  Kind kind_ = Kind::tabulated;
  double k_ = 0.0;
  double beta_ = 0.0;
  double eps_ = 0.0;
  double lo_ = -1.0;
  double hi_ = 1.0;
  double a_ = 0.0;
  double norm_ = 1.0;    // integral of the scaled f over [-1, 1]
  double g_eps_ = 1.0;   // scaled G(eps)
  std::vector<double> grid_;
  std::vector<double> values_;
  double norm_residual_ = 0.0;
};

SteadyDensity p_ss_nofb(double k, double beta, GridSpec spec = {});
SteadyDensity p_ss_fb(double k, double beta, double eps, GridSpec spec = {});

// Integral of (1 + z)/2 p(z) over the support.
double mean_success(const SteadyDensity& p);

struct EpsilonOptimum {
  double eps_star = 0.0;
  double best_success = 0.0;
  std::vector<double> eps;
  std::vector<double> success;
};

// Maximizes mean_success(p_ss_fb(k, beta, eps)) over a grid that must
// contain 0; ties resolve to the smallest eps.
EpsilonOptimum optimize_epsilon(double k, double beta, std::span<const double> eps_grid);

struct AnalyticPerformance {
  double rule_of_thumb = 0.0;     // 1 - beta / (4 k J)
  bool rule_of_thumb_valid = true;  // false once beta / (4 k J) >= 1
  bool has_unbiased_qubit = false;
  double unbiased_qubit = 0.0;    // closed form, dim 2 only
};

AnalyticPerformance analytic_performance(double k, double beta, double j_coupling, int dim);

// Closed-form steady success probability of ideal unbiased feedback on a qubit.
double unbiased_qubit_success(double k, double beta);

// Max over interior grid nodes of |4 beta (z p)' + 4k ((1 - z^2)^2 p)''| by
// central differences, skipping stencils that straddle a kink. Needs a
// uniform grid with at least 64 interior nodes.
double fp_residual(const SteadyDensity& p, double k, double beta);

}  // namespace qfc
