#pragma once

// Dense complex linear algebra for the small Hilbert spaces used here
// (2 <= N <= 8). Storage is a fixed-capacity array so matrices are cheap
// value types with no heap traffic inside trajectory loops.

#include <array>
#include <complex>
#include <initializer_list>
#include <span>

#include "qfc/errors.hpp"
#include "qfc/rng.hpp"

namespace qfc {

using Complex = std::complex<double>;

inline constexpr int kMinDim = 2;
inline constexpr int kMaxDim = 8;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kEigenFloor = -1e-10;

void check_dim(int dim);

class ComplexMatrix {
 public:
  // 2x2 zero matrix; exists so the type is regular.
  ComplexMatrix() : ComplexMatrix(kMinDim) {}
  explicit ComplexMatrix(int dim);
  ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

  static ComplexMatrix identity(int dim);
  static ComplexMatrix diagonal(std::span<const double> entries);

  int dim() const noexcept { return dim_; }

  Complex& operator()(int r, int c) noexcept { return a_[r * kMaxDim + c]; }
  const Complex& operator()(int r, int c) const noexcept { return a_[r * kMaxDim + c]; }

  ComplexMatrix adjoint() const;
  Complex trace() const;
  // max_ij |A_ij - conj(A_ji)|
  double max_asymmetry() const;
  bool is_hermitian(double tol = kHermitianTol) const { return max_asymmetry() <= tol; }
  double max_abs() const;
  // (A + A^dagger)/2
  ComplexMatrix hermitian_part() const;

  ComplexMatrix& operator+=(const ComplexMatrix& o);
  ComplexMatrix& operator-=(const ComplexMatrix& o);
  ComplexMatrix& operator*=(Complex s);

  friend ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
  friend ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
  friend ComplexMatrix operator*(ComplexMatrix a, Complex s) { return a *= s; }
  friend ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
  friend ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

 private:
  int dim_;
  std::array<Complex, kMaxDim * kMaxDim> a_{};
};

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b);
double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b);
// Re Tr[A B]
double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b);

namespace pauli {
ComplexMatrix x();
ComplexMatrix y();
ComplexMatrix z();
}  // namespace pauli

class UnitaryMatrix {
 public:
  // Identity of dimension 2.
  UnitaryMatrix() : m_(ComplexMatrix::identity(kMinDim)) {}

  // Throws InvalidArgument when max|U U^dagger - I| > tol.
  static UnitaryMatrix checked(const ComplexMatrix& m, double tol = kUnitaryTol);
  // For matrices unitary by construction (products of unitaries, Jacobi
  // eigenvector matrices).
  static UnitaryMatrix trusted(const ComplexMatrix& m) { return UnitaryMatrix(m); }
  static UnitaryMatrix identity(int dim) { return UnitaryMatrix(ComplexMatrix::identity(dim)); }

  int dim() const noexcept { return m_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return m_; }
  Complex operator()(int r, int c) const noexcept { return m_(r, c); }
  UnitaryMatrix adjoint() const { return UnitaryMatrix(m_.adjoint()); }

  // max|U U^dagger - I|
  double unitarity_defect() const;

  friend UnitaryMatrix operator*(const UnitaryMatrix& a, const UnitaryMatrix& b) {
    return UnitaryMatrix(a.m_ * b.m_);
  }

 private:
  explicit UnitaryMatrix(const ComplexMatrix& m) : m_(m) {}
  ComplexMatrix m_;
};

// U A U^dagger
ComplexMatrix conjugate(const UnitaryMatrix& u, const ComplexMatrix& a);
// U^dagger A U
ComplexMatrix conjugate_adjoint(const UnitaryMatrix& u, const ComplexMatrix& a);

struct Eigensystem {
  int dim = kMinDim;
  std::array<double, kMaxDim> values{};  // descending
  UnitaryMatrix vectors;                 // column j pairs with values[j]

  std::span<const double> eigenvalues() const { return {values.data(), static_cast<size_t>(dim)}; }
  ComplexMatrix reconstruct() const;
};

// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
// Eigenvalues are sorted descending; each eigenvector is phased so that its
// largest-magnitude component (lowest index on ties) is real positive.
// Throws InvalidArgument if the input is not Hermitian within `tol`.
Eigensystem eigh(const ComplexMatrix& mat, double tol = kHermitianTol);

// exp(i * scale * generator) for Hermitian generator.
UnitaryMatrix expi(const ComplexMatrix& generator, double scale);
UnitaryMatrix expi(const Eigensystem& generator, double scale);

struct UnitaryLog {
  ComplexMatrix generator;  // Hermitian, spectrum in (-pi, pi]
  bool branch_ambiguous = false;  // an eigenvalue sat within 1e-12 of -1
};

// Principal Hermitian logarithm: expi(result.generator, 1) == u.
UnitaryLog principal_log_unitary(const UnitaryMatrix& u);

class DensityMatrix {
 public:
  // |0><0| in dimension 2.
  DensityMatrix();

  // Validates Hermiticity, unit trace and positivity.
  static DensityMatrix from_matrix(const ComplexMatrix& m);
  static DensityMatrix pure(std::span<const Complex> amplitudes);
  static DensityMatrix basis_state(int dim, int index);
  static DensityMatrix diagonal(std::span<const double> populations);

  // Hermitizes, rescales to unit trace and clips eigenvalues below zero.
  // `min_eigenvalue` receives the smallest eigenvalue before clipping.
  static DensityMatrix repaired(const ComplexMatrix& m, double* min_eigenvalue = nullptr);

  int dim() const noexcept { return mat_.dim(); }
  const ComplexMatrix& matrix() const noexcept { return mat_; }
  Complex operator()(int r, int c) const noexcept { return mat_(r, c); }
  const Eigensystem& eigen() const noexcept { return eig_; }

  double largest_eigenvalue() const { return eig_.values[0]; }
  // 1 - lambda_0
  double delta() const { return 1.0 - eig_.values[0]; }
  double purity() const;
  // <e_i| rho |e_i>
  double population(int i) const { return mat_(i, i).real(); }
  double expectation(const ComplexMatrix& op) const;

 private:
  DensityMatrix(const ComplexMatrix& m, const Eigensystem& e) : mat_(m), eig_(e) {}
  ComplexMatrix mat_;
  Eigensystem eig_;
};

// Haar-distributed unitary (QR of a complex Ginibre matrix with the
// R-diagonal phases removed).
UnitaryMatrix haar_unitary(int dim, Rng& rng);

struct HilbertSchmidt {};
struct NearPure {
  double delta;
};

// Hilbert-Schmidt: G G^dagger / Tr[G G^dagger] with Ginibre G.
// NearPure: spectrum (1 - delta, delta * simplex) rotated by a Haar unitary.
DensityMatrix random_density(int dim, HilbertSchmidt, Rng& rng);
DensityMatrix random_density(int dim, NearPure mode, Rng& rng);

}  // namespace qfc
