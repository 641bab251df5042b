#include "qfc/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace qfc {

Observable::Observable(std::span<const double> eigenvalues, const UnitaryMatrix& basis)
    : dim_(static_cast<int>(eigenvalues.size())), basis_(basis), matrix_(basis.dim()) {
  check_dim(dim_);
  if (basis.dim() != dim_) throw InvalidArgument("observable spectrum and basis differ in dimension");
  double sum = 0.0;
  double scale = 0.0;
  for (int j = 0; j < dim_; ++j) {
    values_[j] = eigenvalues[j];
    sum += eigenvalues[j];
    scale = std::max(scale, std::abs(eigenvalues[j]));
  }
  if (std::abs(sum) > 1e-12 * std::max(1.0, scale)) {
    std::ostringstream os;
    os << "observable spectrum must be traceless (sum = " << sum << ")";
    throw InvalidArgument(os.str());
  }
  const ComplexMatrix& v = basis.matrix();
  for (int j = 0; j < dim_; ++j) {
    for (int r = 0; r < dim_; ++r) {
      const Complex vr = v(r, j) * values_[j];
      for (int c = 0; c < dim_; ++c) matrix_(r, c) += vr * std::conj(v(c, j));
    }
  }
  matrix_ = matrix_.hermitian_part();
}

Observable jz_observable(int dim, double scale) {
  check_dim(dim);
  if (scale == 0.0) throw InvalidArgument("jz_observable: scale must be nonzero");
  const double j = 0.5 * (dim - 1);
  std::array<double, kMaxDim> ev{};
  for (int i = 0; i < dim; ++i) ev[i] = (j - i) * scale;
  if (scale > 0) {
    return Observable(std::span<const double>(ev.data(), dim), UnitaryMatrix::identity(dim));
  }
  // keep the spectrum descending: reverse both the values and the basis
  std::array<double, kMaxDim> rev{};
  ComplexMatrix p(dim);
  for (int i = 0; i < dim; ++i) {
    rev[i] = ev[dim - 1 - i];
    p(dim - 1 - i, i) = 1.0;
  }
  return Observable(std::span<const double>(rev.data(), dim), UnitaryMatrix::trusted(p));
}

namespace {

UnitaryMatrix from_columns_scaled(int dim, const std::vector<Complex>& rowmajor, double scale) {
  ComplexMatrix m(dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) m(r, c) = rowmajor[r * dim + c] * scale;
  return UnitaryMatrix::checked(m);
}

}  // namespace

MubFamily mub_family(int dim) {
  MubFamily fam;
  fam.dim = dim;
  const Complex i1(0.0, 1.0);
  switch (dim) {
    case 2: {
      const double h = std::numbers::sqrt2 / 2.0;
      fam.bases.push_back(UnitaryMatrix::identity(2));
      fam.bases.push_back(from_columns_scaled(2, {1.0, 1.0, 1.0, -1.0}, h));
      fam.bases.push_back(from_columns_scaled(2, {1.0, 1.0, i1, -i1}, h));
      break;
    }
    case 3: {
      fam.bases.push_back(UnitaryMatrix::identity(3));
      const double s = 1.0 / std::sqrt(3.0);
      for (int b = 0; b < 3; ++b) {
        ComplexMatrix m(3);
        for (int j = 0; j < 3; ++j)
          for (int col = 0; col < 3; ++col) {
            const int e = (b * j * j + col * j) % 3;
            m(j, col) = std::polar(s, 2.0 * std::numbers::pi * e / 3.0);
          }
        fam.bases.push_back(UnitaryMatrix::checked(m));
      }
      break;
    }
    case 4: {
      fam.bases.push_back(UnitaryMatrix::identity(4));
      const Complex o = 1.0;
      const Complex m = -1.0;
      const Complex p = i1;
      const Complex n = -i1;
      // columns are the joint eigenvectors labelled (+,+), (+,-), (-,+), (-,-)
      // of the first two operators listed for each class
      fam.bases.push_back(from_columns_scaled(4, {o, o, o, o,  //
                                                  o, m, o, m,  //
                                                  o, o, m, m,  //
                                                  o, m, m, o},
                                              0.5));
      fam.bases.push_back(from_columns_scaled(4, {o, o, o, o,  //
                                                  p, n, p, n,  //
                                                  p, p, n, n,  //
                                                  m, o, o, m},
                                              0.5));
      fam.bases.push_back(from_columns_scaled(4, {o, o, o, o,  //
                                                  m, o, o, m,  //
                                                  p, n, p, n,  //
                                                  p, p, n, n},
                                              0.5));
      fam.bases.push_back(from_columns_scaled(4, {o, o, o, o,  //
                                                  p, n, p, n,  //
                                                  m, o, o, m,  //
                                                  p, p, n, n},
                                              0.5));
      break;
    }
    default: {
      std::ostringstream os;
      os << "mub_family: dimension " << dim << " unsupported (supported: 2, 3, 4)";
      throw InvalidArgument(os.str());
    }
  }
  return fam;
}

double unbiasedness_defect(const UnitaryMatrix& a, const UnitaryMatrix& b) {
  const ComplexMatrix overlap = a.matrix().adjoint() * b.matrix();
  const double target = 1.0 / a.dim();
  double worst = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) worst = std::max(worst, std::abs(std::norm(overlap(r, c)) - target));
  return worst;
}

namespace {

void require_unbiased_to_computational(const UnitaryMatrix& m) {
  const double target = 1.0 / m.dim();
  for (int r = 0; r < m.dim(); ++r)
    for (int c = 0; c < m.dim(); ++c)
      if (std::abs(std::norm(m(r, c)) - target) > 1e-10) {
        throw InvalidArgument("basis is not unbiased with respect to the computational basis");
      }
}

}  // namespace

Observable unbiased_observable(const DensityMatrix& rho, const Observable& x,
                               const UnitaryMatrix& mub_basis, std::span<const int> permutation) {
  const int n = rho.dim();
  if (x.dim() != n || mub_basis.dim() != n) throw InvalidArgument("unbiased_observable: dimension mismatch");
  if (static_cast<int>(permutation.size()) != n) throw InvalidArgument("permutation has wrong length");
  std::array<bool, kMaxDim> seen{};
  for (int p : permutation) {
    if (p < 0 || p >= n || seen[p]) throw InvalidArgument("permutation is not a bijection");
    seen[p] = true;
  }
  require_unbiased_to_computational(mub_basis);

  const ComplexMatrix w = rho.eigen().vectors.matrix() * mub_basis.matrix();
  ComplexMatrix permuted(n);
  for (int j = 0; j < n; ++j)
    for (int r = 0; r < n; ++r) permuted(r, j) = w(r, permutation[j]);
  return x.rebased(UnitaryMatrix::trusted(permuted));
}

Observable unbiased_observable(const DensityMatrix& rho, const Observable& x, const UnitaryMatrix& mub_basis) {
  std::array<int, kMaxDim> id{};
  for (int i = 0; i < rho.dim(); ++i) id[i] = i;
  return unbiased_observable(rho, x, mub_basis, std::span<const int>(id.data(), rho.dim()));
}

BasisPath::BasisPath(const UnitaryMatrix& target_basis) {
  require_unbiased_to_computational(target_basis);
  const UnitaryLog lg = principal_log_unitary(target_basis);
  generator_ = eigh(lg.generator, 1e-9);
  branch_ambiguous_ = lg.branch_ambiguous;
}

InterpolatedObservable interpolated_observable(const DensityMatrix& rho, const Observable& x,
                                               const UnitaryMatrix& target_basis, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0)) throw InvalidArgument("interpolation parameter must lie in [0, 1]");
  if (x.dim() != rho.dim() || target_basis.dim() != rho.dim()) {
    throw InvalidArgument("interpolated_observable: dimension mismatch");
  }
  const BasisPath path(target_basis);
  const UnitaryMatrix u = rho.eigen().vectors * path.at(eps);
  return {x.rebased(u), path.branch_ambiguous()};
}

CouplingRow coupling_row(const Observable& x_u, const UnitaryMatrix& rho_basis, int target_index) {
  const int n = x_u.dim();
  if (rho_basis.dim() != n) throw InvalidArgument("coupling_row: dimension mismatch");
  if (target_index < 0 || target_index >= n) throw InvalidArgument("coupling_row: target index out of range");
  const ComplexMatrix y = conjugate_adjoint(rho_basis, x_u.matrix());
  CouplingRow row;
  for (int j = 0; j < n; ++j) {
    if (j == target_index) continue;
    row.couplings.push_back(std::norm(y(target_index, j)));
    row.mean += row.couplings.back();
  }
  row.mean /= (n - 1);
  return row;
}

}  // namespace qfc
