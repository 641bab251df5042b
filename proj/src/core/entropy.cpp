#include "qfc/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qfc {

EntropyReport entropies(const DensityMatrix& rho) {
  EntropyReport r;
  r.linear = 1.0 - rho.purity();
  r.delta = rho.delta();
  for (double l : rho.eigen().eigenvalues()) {
    if (l > 0.0) r.von_neumann -= l * std::log(l);
  }
  // rounding can leave tiny negatives for pure states
  r.linear = std::max(r.linear, 0.0);
  r.delta = std::max(r.delta, 0.0);
  r.von_neumann = std::max(r.von_neumann, 0.0);
  return r;
}

namespace {

constexpr double kMinDelta = 1e-14;

void require_mixed(const DensityMatrix& rho) {
  if (!(rho.delta() >= kMinDelta)) {
    throw InvalidArgument("first-order entropy law undefined for a pure state (Delta = 0)");
  }
}

}  // namespace

double predicted_ds_commuting(const DensityMatrix& rho, const Observable& x, double k, double dW) {
  if (x.dim() != rho.dim()) throw InvalidArgument("predicted_ds_commuting: dimension mismatch");
  const double scale = std::max(1.0, x.matrix().max_abs());
  const double comm = commutator(x.matrix(), rho.matrix()).max_abs();
  if (comm > 1e-8 * scale) {
    std::ostringstream os;
    os << "predicted_ds_commuting: observable does not commute with rho (max|[X,rho]| = " << comm << ")";
    throw InvalidArgument(os.str());
  }
  require_mixed(rho);
  const double delta = rho.delta();
  const double s = entropies(rho).linear;
  const ComplexMatrix y = conjugate_adjoint(rho.eigen().vectors, x.matrix());
  const auto lambda = rho.eigen().eigenvalues();
  double bracket = -y(0, 0).real();
  for (int j = 1; j < rho.dim(); ++j) bracket += y(j, j).real() * lambda[j] / delta;
  return std::sqrt(8.0 * k) * s * bracket * dW;
}

double predicted_ds_unbiased(const DensityMatrix& rho, const Observable& x_u, double k, double dt) {
  if (x_u.dim() != rho.dim()) throw InvalidArgument("predicted_ds_unbiased: dimension mismatch");
  const double defect = unbiasedness_defect(rho.eigen().vectors, x_u.basis());
  if (defect > 1e-8) {
    std::ostringstream os;
    os << "predicted_ds_unbiased: observable basis is not unbiased w.r.t. rho (defect " << defect << ")";
    throw InvalidArgument(os.str());
  }
  require_mixed(rho);
  const double delta = rho.delta();
  const double s = entropies(rho).linear;
  const ComplexMatrix y = conjugate_adjoint(rho.eigen().vectors, x_u.matrix());
  const auto lambda = rho.eigen().eigenvalues();
  double weighted = 0.0;
  for (int j = 1; j < rho.dim(); ++j) weighted += std::norm(y(0, j)) * lambda[j] / delta;
  return -8.0 * k * s * weighted * dt;
}

double exact_mean_entropy_rate(const DensityMatrix& rho, const ComplexMatrix& x, double k) {
  if (x.dim() != rho.dim()) throw InvalidArgument("exact_mean_entropy_rate: dimension mismatch");
  const ComplexMatrix& r = rho.matrix();
  const ComplexMatrix xr = x * r;
  const ComplexMatrix rx = r * x;
  const ComplexMatrix c = xr - rx;
  // Tr[rho [X,[X,rho]]] = -Tr[[X,rho]^2]
  const double dephasing = -real_trace_product(c, c);
  const double mean_x = rho.expectation(x);
  ComplexMatrix m = xr + rx;
  m -= r * Complex(2.0 * mean_x, 0.0);
  const double gain = real_trace_product(m, m);
  return 2.0 * k * dephasing - 2.0 * k * gain;
}

SweepResult entropy_rate_sweep(const DensityMatrix& rho, const Observable& x, const UnitaryMatrix& target_basis,
                               std::span<const double> grid, double k) {
  if (grid.empty()) throw InvalidArgument("entropy_rate_sweep: empty grid");
  for (size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] >= 0.0 && grid[i] <= 1.0)) throw InvalidArgument("entropy_rate_sweep: grid outside [0, 1]");
    if (i > 0 && grid[i] < grid[i - 1]) throw InvalidArgument("entropy_rate_sweep: grid not sorted");
  }
  if (x.dim() != rho.dim() || target_basis.dim() != rho.dim()) {
    throw InvalidArgument("entropy_rate_sweep: dimension mismatch");
  }
  const BasisPath path(target_basis);
  SweepResult out;
  out.branch_ambiguous = path.branch_ambiguous();
  out.curve.reserve(grid.size());
  for (double eps : grid) {
    const Observable obs = x.rebased(rho.eigen().vectors * path.at(eps));
    const double rate = exact_mean_entropy_rate(rho, obs, k);
    out.curve.push_back({eps, rate});
    if (out.curve.size() == 1 || rate <= out.best_rate) {
      out.best_rate = rate;
      out.best_eps = eps;
    }
  }
  return out;
}

}  // namespace qfc
