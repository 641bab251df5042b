#pragma once

#include <span>
#include <vector>

#include "qfc/observables.hpp"
#include "qfc/qlin.hpp"

namespace qfc {

struct EntropyReport {
  double von_neumann = 0.0;  // nats
  double linear = 0.0;       // 1 - Tr[rho^2]
  double delta = 0.0;        // 1 - lambda_max
};

EntropyReport entropies(const DensityMatrix& rho);

// First-order entropy increment for a measurement that commutes with rho:
//   sqrt(8k) S [ sum_{j>=1} X_j lambda_j / Delta - X_0 ] dW
// X_j is the diagonal of x in rho's descending eigenbasis.
// Throws InvalidArgument if [x, rho] != 0 or Delta == 0.
double predicted_ds_commuting(const DensityMatrix& rho, const Observable& x, double k, double dW);

// First-order entropy increment for a measurement unbiased w.r.t. rho:
//   -8k S [ sum_{j>=1} |X_u^{0j}|^2 lambda_j / Delta ] dt
double predicted_ds_unbiased(const DensityMatrix& rho, const Observable& x_u, double k, double dt);

// Exact drift of the linear entropy under the measurement alone (H = 0,
// no environmental noise):
//   2k Tr[rho [X,[X,rho]]] - 2k Tr[(X rho + rho X - 2<X> rho)^2]
double exact_mean_entropy_rate(const DensityMatrix& rho, const ComplexMatrix& x, double k);
inline double exact_mean_entropy_rate(const DensityMatrix& rho, const Observable& x, double k) {
  return exact_mean_entropy_rate(rho, x.matrix(), k);
}

struct SweepPoint {
  double eps;
  double rate;
};

struct SweepResult {
  std::vector<SweepPoint> curve;
  double best_eps = 0.0;   // argmin of rate (fastest entropy reduction)
  double best_rate = 0.0;
  bool branch_ambiguous = false;
};

// Exact entropy rate along the interpolated measurement bases U(eps),
// eps in `grid` (sorted, within [0,1]). Ties resolve to the larger eps.
SweepResult entropy_rate_sweep(const DensityMatrix& rho, const Observable& x,
                               const UnitaryMatrix& target_basis, std::span<const double> grid, double k = 1.0);

}  // namespace qfc
