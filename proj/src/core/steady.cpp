#include "qfc/steady.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qfc/errors.hpp"
#include "qfc/quadrature.hpp"

namespace qfc {

namespace {

constexpr double kQuadTol = 1e-12;

// f and g are carried scaled by exp(+-a) so that large a does not underflow:
//   f(z) e^a = exp(-a z^2 / s) / s^2,   g(x) e^-a = exp(a x^2 / s),   s = 1 - z^2
double f_scaled(double a, double z, double s) {
  if (s <= 0.0) return 0.0;
  return std::exp(-a * z * z / s - 2.0 * std::log(s));
}

double g_scaled(double a, double x) {
  const double s = 1.0 - x * x;
  return std::exp(a * x * x / s);
}

double big_g(double a, double z) {
  if (z == 0.0) return 0.0;
  return integrate([a](double x) { return g_scaled(a, x); }, 0.0, z, kQuadTol);
}

void check_rates(double k, double beta) {
  if (!(k > 0.0) || !std::isfinite(k)) throw InvalidArgument("steady state needs k > 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw InvalidArgument("steady state needs beta >= 0");
  if (beta == 0.0) {
    throw InvalidArgument("beta = 0 has no normalizable steady density (mass collects at z = +-1)");
  }
}

std::vector<double> uniform_grid(double lo, double hi, int nodes) {
  if (nodes < 2) throw InvalidArgument("grid needs at least 2 nodes");
  std::vector<double> g(static_cast<size_t>(nodes));
  const double h = (hi - lo) / (nodes - 1);
  for (int i = 0; i < nodes; ++i) g[static_cast<size_t>(i)] = lo + i * h;
  g.back() = hi;
  return g;
}

}  // namespace

SteadyDensity SteadyDensity::tabulated(std::vector<double> grid, std::vector<double> values) {
  if (grid.size() != values.size() || grid.size() < 2) {
    throw InvalidArgument("tabulated density: grid and values must have equal length >= 2");
  }
  for (size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("tabulated density: grid must be strictly increasing");
  }
  for (double v : values) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidArgument("tabulated density: values must be finite and >= 0");
  }
  SteadyDensity d;
  d.kind_ = Kind::tabulated;
  d.lo_ = grid.front();
  d.hi_ = grid.back();
  d.grid_ = std::move(grid);
  d.values_ = std::move(values);
  double mass = 0.0;
  for (size_t i = 1; i < d.grid_.size(); ++i) {
    mass += 0.5 * (d.values_[i] + d.values_[i - 1]) * (d.grid_[i] - d.grid_[i - 1]);
  }
  d.norm_residual_ = std::abs(mass - 1.0);
  return d;
}

double SteadyDensity::operator()(double z) const {
  if (z < lo_ || z > hi_) return 0.0;
  switch (kind_) {
    case Kind::no_feedback:
      return f_scaled(a_, z, 1.0 - z * z) / norm_;
    case Kind::feedback: {
      const double f = f_scaled(a_, z, 1.0 - z * z) / norm_;
      if (z >= eps_) return 2.0 * f;
      return f * (1.0 + big_g(a_, z) / g_eps_);
    }
    case Kind::tabulated: {
      const auto it = std::upper_bound(grid_.begin(), grid_.end(), z);
      if (it == grid_.end()) return values_.back();
      const size_t i = static_cast<size_t>(it - grid_.begin());
      const double t = (z - grid_[i - 1]) / (grid_[i] - grid_[i - 1]);
      return (1.0 - t) * values_[i - 1] + t * values_[i];
    }
  }
  return 0.0;
}

std::vector<double> SteadyDensity::kinks() const {
  if (kind_ == Kind::feedback && eps_ > 0.0) return {eps_};
  return {};
}

double SteadyDensity::integral(double lo, double hi, bool weight_success) const {
  if (lo >= hi) return 0.0;
  auto w = [weight_success](double z) { return weight_success ? 0.5 * (1.0 + z) : 1.0; };
  if (kind_ == Kind::feedback && hi > eps_ && lo < eps_) {
    return integral(lo, eps_, weight_success) + integral(eps_, hi, weight_success);
  }
  if (kind_ == Kind::feedback && hi <= eps_) {
    // inner piece: G(z) is itself a quadrature, so integrate on the plain variable
    return integrate([&](double z) { return w(z) * (*this)(z); }, lo, hi, 1e-10);
  }
  return integrate_tanh(
      [&](double z, double s) {
        const double scale = kind_ == Kind::feedback ? 2.0 : 1.0;
        return w(z) * scale * f_scaled(a_, z, s) / norm_;
      },
      lo, hi, kQuadTol);
}

SteadyDensity p_ss_nofb(double k, double beta, GridSpec spec) {
  check_rates(k, beta);
  SteadyDensity d;
  d.kind_ = SteadyDensity::Kind::no_feedback;
  d.k_ = k;
  d.beta_ = beta;
  d.a_ = beta / (2.0 * k);
  d.lo_ = -1.0;
  d.hi_ = 1.0;
  const double a = d.a_;
  d.norm_ = 2.0 * integrate_tanh([a](double z, double s) { return f_scaled(a, z, s); }, 0.0, 1.0, kQuadTol);
  d.grid_ = uniform_grid(-1.0, 1.0, spec.nodes);
  d.values_.reserve(d.grid_.size());
  for (double z : d.grid_) d.values_.push_back(d(z));
  d.norm_residual_ = std::abs(d.integral(-1.0, 1.0, false) - 1.0);
  return d;
}

SteadyDensity p_ss_fb(double k, double beta, double eps, GridSpec spec) {
  check_rates(k, beta);
  if (!(eps >= 0.0 && eps < 1.0)) {
    std::ostringstream os;
    os << "threshold eps = " << eps << " outside [0, 1)";
    throw InvalidArgument(os.str());
  }
  SteadyDensity d;
  d.kind_ = SteadyDensity::Kind::feedback;
  d.k_ = k;
  d.beta_ = beta;
  d.eps_ = eps;
  d.a_ = beta / (2.0 * k);
  d.lo_ = -eps;
  d.hi_ = 1.0;
  const double a = d.a_;
  // With the displayed constants the unnormalized density integrates to the
  // no-feedback normalization, so that is the normalizer here.
  d.norm_ = 2.0 * integrate_tanh([a](double z, double s) { return f_scaled(a, z, s); }, 0.0, 1.0, kQuadTol);
  d.g_eps_ = eps > 0.0 ? big_g(a, eps) : 1.0;
  d.grid_ = uniform_grid(-eps, 1.0, spec.nodes);
  d.values_.reserve(d.grid_.size());
  for (double z : d.grid_) d.values_.push_back(d(z));
  d.norm_residual_ = std::abs(d.integral(-eps, 1.0, false) - 1.0);
  if (eps > 0.0) {
    // continuity at the re-injection point
    const double below = f_scaled(a, eps, 1.0 - eps * eps) / d.norm_ * (1.0 + big_g(a, eps) / d.g_eps_);
    const double above = d(eps);
    if (std::abs(below - above) > 1e-9 * std::max(1.0, above)) {
      throw NumericalError("feedback steady density is discontinuous at z = eps");
    }
  }
  return d;
}

double mean_success(const SteadyDensity& p) {
  switch (p.kind()) {
    case SteadyDensity::Kind::tabulated: {
      const auto g = p.grid();
      const auto v = p.values();
      double acc = 0.0;
      for (size_t i = 1; i < g.size(); ++i) {
        const double a = 0.5 * (1.0 + g[i - 1]) * v[i - 1];
        const double b = 0.5 * (1.0 + g[i]) * v[i];
        acc += 0.5 * (a + b) * (g[i] - g[i - 1]);
      }
      return acc;
    }
    case SteadyDensity::Kind::feedback: {
      // z f = -(1/2a) dE/dz with E(z) = exp(-a z^2/(1 - z^2)) and g E = 1 reduce
      // the integral to 1/2 + eps / (2 a G(eps) N), with eps/G(eps) -> 1 at 0.
      const double ratio = p.eps_ > 0.0 ? p.eps_ / p.g_eps_ : 1.0;
      return 0.5 + ratio / (2.0 * p.a_ * p.norm_);
    }
    case SteadyDensity::Kind::no_feedback:
      break;
  }
  return p.integral(p.support_lo(), p.support_hi(), true);
}

EpsilonOptimum optimize_epsilon(double k, double beta, std::span<const double> eps_grid) {
  if (std::find(eps_grid.begin(), eps_grid.end(), 0.0) == eps_grid.end()) {
    throw InvalidArgument("optimize_epsilon: the grid must contain eps = 0");
  }
  EpsilonOptimum out;
  bool first = true;
  for (double eps : eps_grid) {
    const double p = mean_success(p_ss_fb(k, beta, eps, GridSpec{2}));
    out.eps.push_back(eps);
    out.success.push_back(p);
    if (first || p > out.best_success || (p == out.best_success && eps < out.eps_star)) {
      out.best_success = p;
      out.eps_star = eps;
      first = false;
    }
  }
  return out;
}

double unbiased_qubit_success(double k, double beta) {
  if (!(k > 0.0) || !(beta >= 0.0)) throw InvalidArgument("unbiased_qubit_success: need k > 0 and beta >= 0");
  return 0.5 * (1.0 + std::sqrt(k / (k + beta)));
}

AnalyticPerformance analytic_performance(double k, double beta, double j_coupling, int dim) {
  if (!(k > 0.0)) throw InvalidArgument("analytic_performance: k must be > 0");
  if (!(beta >= 0.0)) throw InvalidArgument("analytic_performance: beta must be >= 0");
  if (!(j_coupling > 0.0)) throw InvalidArgument("analytic_performance: coupling J must be > 0");
  if (dim < 2) throw InvalidArgument("analytic_performance: dimension must be >= 2");
  AnalyticPerformance out;
  const double x = beta / (4.0 * k * j_coupling);
  out.rule_of_thumb = 1.0 - x;
  out.rule_of_thumb_valid = x < 1.0;
  if (dim == 2) {
    out.has_unbiased_qubit = true;
    out.unbiased_qubit = unbiased_qubit_success(k, beta);
  }
  return out;
}

double fp_residual(const SteadyDensity& p, double k, double beta) {
  const auto g = p.grid();
  const auto v = p.values();
  const size_t n = g.size();
  if (n < 66) throw InvalidArgument("fp_residual: grid too coarse (need at least 64 interior nodes)");
  const double h = (g.back() - g.front()) / static_cast<double>(n - 1);
  for (size_t i = 1; i < n; ++i) {
    if (std::abs(g[i] - g[i - 1] - h) > 1e-9 * h) throw InvalidArgument("fp_residual: grid must be uniform");
  }
  const std::vector<double> kinks = p.kinks();
  auto w = [&](size_t i) {
    const double s = 1.0 - g[i] * g[i];
    return s * s * v[i];
  };
  double worst = 0.0;
  for (size_t i = 1; i + 1 < n; ++i) {
    bool straddles = false;
    for (double c : kinks) {
      if (g[i - 1] < c - 1e-12 && g[i + 1] > c + 1e-12) straddles = true;
    }
    if (straddles) continue;
    const double drift = (g[i + 1] * v[i + 1] - g[i - 1] * v[i - 1]) / (2.0 * h);
    const double diff = (w(i + 1) - 2.0 * w(i) + w(i - 1)) / (h * h);
    worst = std::max(worst, std::abs(4.0 * beta * drift + 4.0 * k * diff));
  }
  return worst;
}

}  // namespace qfc
