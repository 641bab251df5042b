#pragma once

#include <span>
#include <vector>

#include "qfc/qlin.hpp"

namespace qfc {

// Hermitian operator stored as its spectrum and eigenbasis. The spectrum is
// traceless; column j of basis() carries eigenvalue eigenvalues()[j].
class Observable {
 public:
  Observable(std::span<const double> eigenvalues, const UnitaryMatrix& basis);

  int dim() const noexcept { return dim_; }
  std::span<const double> eigenvalues() const { return {values_.data(), static_cast<size_t>(dim_)}; }
  const UnitaryMatrix& basis() const noexcept { return basis_; }
  // basis * diag(eigenvalues) * basis^dagger
  const ComplexMatrix& matrix() const noexcept { return matrix_; }

  // Same spectrum, new eigenbasis.
  Observable rebased(const UnitaryMatrix& basis) const { return Observable(eigenvalues(), basis); }

 private:
  int dim_;
  std::array<double, kMaxDim> values_{};
  UnitaryMatrix basis_;
  ComplexMatrix matrix_;
};

// Equi-spaced J_z spectrum j, j-1, ..., -j (j = (dim-1)/2) times `scale`,
// diagonal in the computational basis. jz_observable(2, 2) is sigma_z.
Observable jz_observable(int dim, double scale = 1.0);

struct MubFamily {
  int dim = 0;
  // bases[0] is the computational basis; every other entry is unbiased
  // with respect to it and to each other.
  std::vector<UnitaryMatrix> bases;

  int count() const { return static_cast<int>(bases.size()); }
};

// Complete MUB sets for dim in {2, 3, 4}:
//   2: eigenbases of sigma_z, sigma_x, sigma_y
//   3: computational basis plus the three quadratic-phase Fourier bases
//      v_m[j] = omega^(b j^2 + m j) / sqrt(3), omega = exp(2 pi i / 3)
//   4: computational basis plus the common eigenbases of the four remaining
//      classes of the GF(4) partition of two-qubit Pauli operators
//      {XI,IX,XX}, {YI,IY,YY}, {XY,YZ,ZX}, {YX,ZY,XZ}
MubFamily mub_family(int dim);

// max over column pairs of | |<a_i|b_j>|^2 - 1/N |
double unbiasedness_defect(const UnitaryMatrix& a, const UnitaryMatrix& b);

// Observable whose eigenbasis is unbiased w.r.t. the eigenbasis of rho:
// eigenvalue x.eigenvalues()[j] sits on column permutation[j] of
// V_rho * mub_basis. Only the spectrum of x is used.
Observable unbiased_observable(const DensityMatrix& rho, const Observable& x,
                               const UnitaryMatrix& mub_basis, std::span<const int> permutation);
Observable unbiased_observable(const DensityMatrix& rho, const Observable& x,
                               const UnitaryMatrix& mub_basis);

struct InterpolatedObservable {
  Observable observable;
  bool branch_ambiguous = false;
};

// x conjugated by V_rho * exp(i eps A), with A the principal log of
// target_basis. eps = 0 commutes with rho, eps = 1 is unbiased.
InterpolatedObservable interpolated_observable(const DensityMatrix& rho, const Observable& x,
                                               const UnitaryMatrix& target_basis, double eps);

// Precomputed generator for repeated interpolation along the same path.
class BasisPath {
 public:
  explicit BasisPath(const UnitaryMatrix& target_basis);

  UnitaryMatrix at(double eps) const { return expi(generator_, eps); }
  bool branch_ambiguous() const noexcept { return branch_ambiguous_; }

 private:
  Eigensystem generator_;
  bool branch_ambiguous_;
};

struct CouplingRow {
  std::vector<double> couplings;  // |X^{t j}|^2 for j != t, in index order
  double mean = 0.0;              // J
};

// Squared matrix elements between the target eigenvector (column
// target_index of rho_basis) and the other eigenvectors.
CouplingRow coupling_row(const Observable& x_u, const UnitaryMatrix& rho_basis, int target_index = 0);

}  // namespace qfc
