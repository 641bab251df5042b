#include "qfc/qlin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace qfc {

void check_dim(int dim) {
  if (dim < kMinDim || dim > kMaxDim) {
    std::ostringstream os;
    os << "dimension " << dim << " outside supported range [" << kMinDim << ", " << kMaxDim << "]";
    throw InvalidArgument(os.str());
  }
}

ComplexMatrix::ComplexMatrix(int dim) : dim_(dim) { check_dim(dim); }

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : dim_(static_cast<int>(rows.size())) {
  check_dim(dim_);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != dim_) {
      throw InvalidArgument("matrix initializer is not square");
    }
    int c = 0;
    for (const auto& v : row) (*this)(r, c++) = v;
    ++r;
  }
}

ComplexMatrix ComplexMatrix::identity(int dim) {
  ComplexMatrix m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

ComplexMatrix ComplexMatrix::diagonal(std::span<const double> entries) {
  ComplexMatrix m(static_cast<int>(entries.size()));
  for (int i = 0; i < m.dim_; ++i) m(i, i) = entries[i];
  return m;
}

ComplexMatrix ComplexMatrix::adjoint() const {
  ComplexMatrix m(dim_);
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) m(c, r) = std::conj((*this)(r, c));
  return m;
}

Complex ComplexMatrix::trace() const {
  Complex t = 0.0;
  for (int i = 0; i < dim_; ++i) t += (*this)(i, i);
  return t;
}

double ComplexMatrix::max_asymmetry() const {
  double worst = 0.0;
  for (int r = 0; r < dim_; ++r)
    for (int c = r; c < dim_; ++c)
      worst = std::max(worst, std::abs((*this)(r, c) - std::conj((*this)(c, r))));
  return worst;
}

double ComplexMatrix::max_abs() const {
  double worst = 0.0;
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) worst = std::max(worst, std::abs((*this)(r, c)));
  return worst;
}

ComplexMatrix ComplexMatrix::hermitian_part() const {
  ComplexMatrix m(dim_);
  for (int r = 0; r < dim_; ++r) {
    m(r, r) = (*this)(r, r).real();
    for (int c = r + 1; c < dim_; ++c) {
      const Complex v = 0.5 * ((*this)(r, c) + std::conj((*this)(c, r)));
      m(r, c) = v;
      m(c, r) = std::conj(v);
    }
  }
  return m;
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& o) {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) (*this)(r, c) += o(r, c);
  return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& o) {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) (*this)(r, c) -= o(r, c);
  return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) {
  for (int r = 0; r < dim_; ++r)
    for (int c = 0; c < dim_; ++c) (*this)(r, c) *= s;
  return *this;
}

ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) {
  const int n = a.dim();
  if (b.dim() != n) throw InvalidArgument("matrix product of mismatched dimensions");
  ComplexMatrix m(n);
  for (int r = 0; r < n; ++r)
    for (int k = 0; k < n; ++k) {
      const Complex ark = a(r, k);
      if (ark == 0.0) continue;
      for (int c = 0; c < n; ++c) m(r, c) += ark * b(k, c);
    }
  return m;
}

ComplexMatrix commutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b - b * a; }

ComplexMatrix anticommutator(const ComplexMatrix& a, const ComplexMatrix& b) { return a * b + b * a; }

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("comparing matrices of mismatched dimensions");
  double worst = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) worst = std::max(worst, std::abs(a(r, c) - b(r, c)));
  return worst;
}

double real_trace_product(const ComplexMatrix& a, const ComplexMatrix& b) {
  double t = 0.0;
  for (int r = 0; r < a.dim(); ++r)
    for (int c = 0; c < a.dim(); ++c) t += (a(r, c) * b(c, r)).real();
  return t;
}

namespace pauli {
ComplexMatrix x() { return {{0.0, 1.0}, {1.0, 0.0}}; }
ComplexMatrix y() { return {{0.0, Complex(0, -1)}, {Complex(0, 1), 0.0}}; }
ComplexMatrix z() { return {{1.0, 0.0}, {0.0, -1.0}}; }
}  // namespace pauli

double UnitaryMatrix::unitarity_defect() const {
  return max_abs_diff(m_ * m_.adjoint(), ComplexMatrix::identity(m_.dim()));
}

UnitaryMatrix UnitaryMatrix::checked(const ComplexMatrix& m, double tol) {
  UnitaryMatrix u(m);
  const double defect = u.unitarity_defect();
  if (!(defect <= tol)) {
    std::ostringstream os;
    os << "matrix is not unitary: max|UU^dagger - I| = " << defect;
    throw InvalidArgument(os.str());
  }
  return u;
}

ComplexMatrix conjugate(const UnitaryMatrix& u, const ComplexMatrix& a) {
  return u.matrix() * a * u.matrix().adjoint();
}

ComplexMatrix conjugate_adjoint(const UnitaryMatrix& u, const ComplexMatrix& a) {
  return u.matrix().adjoint() * a * u.matrix();
}

ComplexMatrix Eigensystem::reconstruct() const {
  ComplexMatrix d = ComplexMatrix::diagonal(eigenvalues());
  return conjugate(vectors, d);
}

namespace {

// Phase column j so its largest-magnitude entry is real positive.
void fix_phase(ComplexMatrix& v, int j) {
  const int n = v.dim();
  double best = 0.0;
  for (int i = 0; i < n; ++i) best = std::max(best, std::abs(v(i, j)));
  int pick = 0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(v(i, j)) >= best - 1e-12) {
      pick = i;
      break;
    }
  }
  const Complex p = v(pick, j);
  const double mag = std::abs(p);
  if (mag == 0.0) return;
  const Complex rot = std::conj(p) / mag;
  for (int i = 0; i < n; ++i) v(i, j) *= rot;
  v(pick, j) = v(pick, j).real();
}

}  // namespace

Eigensystem eigh(const ComplexMatrix& mat, double tol) {
  const int n = mat.dim();
  const double asym = mat.max_asymmetry();
  if (!(asym <= tol * std::max(1.0, mat.max_abs()))) {
    std::ostringstream os;
    os << "eigh: input is not Hermitian (max asymmetry " << asym << ")";
    throw InvalidArgument(os.str());
  }

  ComplexMatrix a = mat.hermitian_part();
  ComplexMatrix v = ComplexMatrix::identity(n);

  double frob2 = 0.0;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) frob2 += std::norm(a(r, c));

  constexpr int kMaxSweeps = 64;
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += std::norm(a(p, q));
    if (off <= 1e-34 * frob2 || off < 1e-300) break;

    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const Complex apq = a(p, q);
        const double g = std::abs(apq);
        if (g == 0.0) continue;
        const Complex phase = apq / g;
        const double app = a(p, p).real();
        const double aqq = a(q, q).real();
        const double theta = (aqq - app) / (2.0 * g);
        double t;
        if (std::abs(theta) > 1e150) {
          t = 0.5 / theta;
        } else {
          t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        }
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const Complex jpp = c;
        const Complex jpq = s;
        const Complex jqp = -s * std::conj(phase);
        const Complex jqq = c * std::conj(phase);

        for (int k = 0; k < n; ++k) {
          const Complex akp = a(k, p);
          const Complex akq = a(k, q);
          a(k, p) = akp * jpp + akq * jqp;
          a(k, q) = akp * jpq + akq * jqq;
        }
        for (int k = 0; k < n; ++k) {
          const Complex apk = a(p, k);
          const Complex aqk = a(q, k);
          a(p, k) = std::conj(jpp) * apk + std::conj(jqp) * aqk;
          a(q, k) = std::conj(jpq) * apk + std::conj(jqq) * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        a(p, p) = a(p, p).real();
        a(q, q) = a(q, q).real();

        for (int k = 0; k < n; ++k) {
          const Complex vkp = v(k, p);
          const Complex vkq = v(k, q);
          v(k, p) = vkp * jpp + vkq * jqp;
          v(k, q) = vkp * jpq + vkq * jqq;
        }
      }
    }
  }
  if (sweep == kMaxSweeps) throw NumericalError("eigh: Jacobi iteration did not converge");

  std::array<int, kMaxDim> order{};
  for (int i = 0; i < n; ++i) order[i] = i;
  // stable so equal eigenvalues keep the rotation order (deterministic)
  std::stable_sort(order.begin(), order.begin() + n,
                   [&](int i, int j) { return a(i, i).real() > a(j, j).real(); });

  Eigensystem out;
  out.dim = n;
  ComplexMatrix vs(n);
  for (int j = 0; j < n; ++j) {
    out.values[j] = a(order[j], order[j]).real();
    for (int i = 0; i < n; ++i) vs(i, j) = v(i, order[j]);
    fix_phase(vs, j);
  }
  out.vectors = UnitaryMatrix::trusted(vs);
  return out;
}

UnitaryMatrix expi(const Eigensystem& generator, double scale) {
  const int n = generator.dim;
  const ComplexMatrix& v = generator.vectors.matrix();
  ComplexMatrix u(n);
  for (int j = 0; j < n; ++j) {
    const Complex ph = std::polar(1.0, scale * generator.values[j]);
    for (int r = 0; r < n; ++r) {
      const Complex vr = v(r, j) * ph;
      for (int c = 0; c < n; ++c) u(r, c) += vr * std::conj(v(c, j));
    }
  }
  return UnitaryMatrix::trusted(u);
}

UnitaryMatrix expi(const ComplexMatrix& generator, double scale) {
  if (scale == 0.0) {
    if (!generator.is_hermitian(kHermitianTol * std::max(1.0, generator.max_abs()))) {
      throw InvalidArgument("expi: generator is not Hermitian");
    }
    return UnitaryMatrix::identity(generator.dim());
  }
  return expi(eigh(generator), scale);
}

UnitaryLog principal_log_unitary(const UnitaryMatrix& u) {
  const int n = u.dim();
  const ComplexMatrix& m = u.matrix();
  const ComplexMatrix madj = m.adjoint();
  // Re-part and Im-part of U commute and share U's eigenvectors. A generic
  // real mix c1*Re + c2*Im separates distinct eigenphases unless they are
  // mirror images about the mixing angle, so try a few angles and keep the
  // one that diagonalizes U best.
  const ComplexMatrix re = (m + madj) * Complex(0.5, 0.0);
  const ComplexMatrix im = (m - madj) * Complex(0.0, -0.5);
  static constexpr std::array<double, 6> kMix = {0.5772156649015329, 1.6180339887498949,
                                                 -0.7390851332151607, 2.718281828459045,
                                                 -3.141592653589793 / 7.0, 0.3183098861837907};

  double best_resid = std::numeric_limits<double>::infinity();
  UnitaryMatrix best_v = UnitaryMatrix::identity(n);
  for (double c : kMix) {
    const Eigensystem e = eigh(re + im * Complex(c, 0.0), 1e-9);
    const ComplexMatrix d = conjugate_adjoint(e.vectors, m);
    double resid = 0.0;
    for (int r = 0; r < n; ++r)
      for (int k = 0; k < n; ++k)
        if (r != k) resid = std::max(resid, std::abs(d(r, k)));
    if (resid < best_resid) {
      best_resid = resid;
      best_v = e.vectors;
    }
    if (resid <= 1e-13) break;
  }

  const ComplexMatrix d = conjugate_adjoint(best_v, m);
  UnitaryLog out;
  std::array<double, kMaxDim> phase{};
  for (int j = 0; j < n; ++j) {
    const Complex z = d(j, j);
    if (std::abs(z + 1.0) < 1e-12) {
      phase[j] = std::numbers::pi;
      out.branch_ambiguous = true;
    } else {
      double th = std::arg(z);
      if (th <= -std::numbers::pi) th = std::numbers::pi;
      phase[j] = th;
    }
  }
  ComplexMatrix diag(n);
  for (int j = 0; j < n; ++j) diag(j, j) = phase[j];
  out.generator = conjugate(best_v, diag).hermitian_part();
  return out;
}

DensityMatrix::DensityMatrix() : DensityMatrix(basis_state(kMinDim, 0)) {}

DensityMatrix DensityMatrix::from_matrix(const ComplexMatrix& m) {
  const double asym = m.max_asymmetry();
  if (!(asym <= kHermitianTol * std::max(1.0, m.max_abs()))) {
    std::ostringstream os;
    os << "density matrix is not Hermitian (max asymmetry " << asym << ")";
    throw InvalidArgument(os.str());
  }
  const ComplexMatrix h = m.hermitian_part();
  const double tr = h.trace().real();
  if (!(std::abs(tr - 1.0) <= kTraceTol)) {
    std::ostringstream os;
    os << "density matrix trace is " << tr << ", expected 1";
    throw InvalidArgument(os.str());
  }
  Eigensystem e = eigh(h);
  if (!(e.values[h.dim() - 1] >= kEigenFloor)) {
    std::ostringstream os;
    os << "density matrix has negative eigenvalue " << e.values[h.dim() - 1];
    throw InvalidArgument(os.str());
  }
  return DensityMatrix(h, e);
}

DensityMatrix DensityMatrix::pure(std::span<const Complex> amplitudes) {
  const int n = static_cast<int>(amplitudes.size());
  check_dim(n);
  double norm = 0.0;
  for (const auto& a : amplitudes) norm += std::norm(a);
  if (!(norm > 0.0)) throw InvalidArgument("pure state with zero norm");
  ComplexMatrix m(n);
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) m(r, c) = amplitudes[r] * std::conj(amplitudes[c]) / norm;
  return repaired(m);
}

DensityMatrix DensityMatrix::basis_state(int dim, int index) {
  check_dim(dim);
  if (index < 0 || index >= dim) throw InvalidArgument("basis state index out of range");
  ComplexMatrix m(dim);
  m(index, index) = 1.0;
  Eigensystem e;
  e.dim = dim;
  e.values[0] = 1.0;
  // columns: index first, then the others in order
  ComplexMatrix v(dim);
  v(index, 0) = 1.0;
  for (int j = 1, i = 0; j < dim; ++i) {
    if (i == index) continue;
    v(i, j++) = 1.0;
  }
  e.vectors = UnitaryMatrix::trusted(v);
  return DensityMatrix(m, e);
}

DensityMatrix DensityMatrix::diagonal(std::span<const double> populations) {
  return from_matrix(ComplexMatrix::diagonal(populations));
}

DensityMatrix DensityMatrix::repaired(const ComplexMatrix& m, double* min_eigenvalue) {
  ComplexMatrix h = m.hermitian_part();
  const double tr = h.trace().real();
  if (!std::isfinite(tr) || !(tr > 0.0)) {
    throw NumericalError("density matrix update produced a non-positive or non-finite trace");
  }
  h *= 1.0 / tr;
  Eigensystem e = eigh(h);
  const int n = h.dim();
  const double lowest = e.values[n - 1];
  if (min_eigenvalue) *min_eigenvalue = lowest;
  if (lowest < 0.0) {
    double total = 0.0;
    for (int j = 0; j < n; ++j) {
      e.values[j] = std::max(e.values[j], 0.0);
      total += e.values[j];
    }
    for (int j = 0; j < n; ++j) e.values[j] /= total;
    h = e.reconstruct().hermitian_part();
  }
  return DensityMatrix(h, e);
}

double DensityMatrix::purity() const {
  double p = 0.0;
  for (int r = 0; r < dim(); ++r)
    for (int c = 0; c < dim(); ++c) p += std::norm(mat_(r, c));
  return p;
}

double DensityMatrix::expectation(const ComplexMatrix& op) const {
  return real_trace_product(mat_, op);
}

namespace {

Complex complex_normal(Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  const double re = nd(rng);
  const double im = nd(rng);
  return {re, im};
}

}  // namespace

UnitaryMatrix haar_unitary(int dim, Rng& rng) {
  check_dim(dim);
  ComplexMatrix g(dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = complex_normal(rng);
  // modified Gram-Schmidt; R has a positive diagonal, which makes Q Haar
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < j; ++k) {
      Complex proj = 0.0;
      for (int i = 0; i < dim; ++i) proj += std::conj(g(i, k)) * g(i, j);
      for (int i = 0; i < dim; ++i) g(i, j) -= proj * g(i, k);
    }
    double norm = 0.0;
    for (int i = 0; i < dim; ++i) norm += std::norm(g(i, j));
    norm = std::sqrt(norm);
    for (int i = 0; i < dim; ++i) g(i, j) /= norm;
  }
  return UnitaryMatrix::trusted(g);
}

DensityMatrix random_density(int dim, HilbertSchmidt, Rng& rng) {
  check_dim(dim);
  ComplexMatrix g(dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) g(r, c) = complex_normal(rng);
  ComplexMatrix m = g * g.adjoint();
  return DensityMatrix::repaired(m);
}

DensityMatrix random_density(int dim, NearPure mode, Rng& rng) {
  check_dim(dim);
  if (!(mode.delta >= 0.0 && mode.delta < 0.5)) {
    std::ostringstream os;
    os << "near-pure delta " << mode.delta << " outside [0, 0.5)";
    throw InvalidArgument(os.str());
  }
  std::array<double, kMaxDim> spec{};
  spec[0] = 1.0 - mode.delta;
  std::exponential_distribution<double> ex(1.0);
  double total = 0.0;
  for (int i = 1; i < dim; ++i) {
    spec[i] = ex(rng);
    total += spec[i];
  }
  for (int i = 1; i < dim; ++i) spec[i] *= mode.delta / total;
  const UnitaryMatrix u = haar_unitary(dim, rng);
  const ComplexMatrix d = ComplexMatrix::diagonal(std::span<const double>(spec.data(), dim));
  return DensityMatrix::repaired(conjugate(u, d));
}

}  // namespace qfc
