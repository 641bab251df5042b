#include <cmath>
#include <numbers>

#include "doctest.h"
#include "gen.hpp"
#include "qfc/qlin.hpp"

using namespace qfc;

namespace {

ComplexMatrix projector(const UnitaryMatrix& v, int col) {
  const int n = v.dim();
  ComplexMatrix p(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) p(i, j) = v(i, col) * std::conj(v(j, col));
  return p;
}

}  // namespace

TEST_CASE("dimension bounds") {
  CHECK_THROWS_AS(check_dim(1), InvalidArgument);
  CHECK_THROWS_AS(check_dim(9), InvalidArgument);
  CHECK_NOTHROW(check_dim(2));
  CHECK_NOTHROW(check_dim(8));
}

TEST_CASE("eigh on textbook matrices") {
  const Eigensystem id = eigh(ComplexMatrix::identity(2));
  CHECK(id.values[0] == doctest::Approx(1.0));
  CHECK(id.values[1] == doctest::Approx(1.0));
  CHECK(id.vectors.unitarity_defect() < 1e-14);

  const Eigensystem sx = eigh(pauli::x());
  CHECK(sx.values[0] == doctest::Approx(1.0));
  CHECK(sx.values[1] == doctest::Approx(-1.0));
  const double h = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(sx.vectors(0, 0) - Complex(h, 0)) < 1e-14);
  CHECK(std::abs(sx.vectors(1, 0) - Complex(h, 0)) < 1e-14);
  CHECK(std::abs(sx.vectors(0, 1) - Complex(h, 0)) < 1e-14);
  CHECK(std::abs(sx.vectors(1, 1) - Complex(-h, 0)) < 1e-14);
}

TEST_CASE("eigh rejects non-Hermitian input") {
  ComplexMatrix m(2);
  m(0, 1) = 1.0;
  CHECK_THROWS_AS(eigh(m), InvalidArgument);
}

TEST_CASE("property: eigh reconstructs random Hermitian matrices") {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = trial < 100 ? 4 : gen::dim(rng);
    const ComplexMatrix a = gen::hermitian(rng, n);
    const Eigensystem e = eigh(a);
    worst = std::max(worst, max_abs_diff(e.reconstruct(), a));
    for (int i = 1; i < n; ++i) REQUIRE(e.values[i - 1] >= e.values[i]);
    REQUIRE(e.vectors.unitarity_defect() < 1e-12);
    // phase convention: largest component real positive
    for (int c = 0; c < n; ++c) {
      int best = 0;
      for (int r = 1; r < n; ++r)
        if (std::abs(e.vectors(r, c)) > std::abs(e.vectors(best, c)) + 1e-12) best = r;
      CHECK(std::abs(e.vectors(best, c).imag()) < 1e-12);
      CHECK(e.vectors(best, c).real() > 0.0);
    }
  }
  CHECK(worst <= 1e-11);
}

TEST_CASE("property: degenerate spectra give the right eigenprojectors") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = gen::dim(rng, 3, 6);
    std::vector<double> ev(n, -0.5);
    ev[0] = 2.0;
    const ComplexMatrix u = gen::unitary(rng, n);
    const Eigensystem e = eigh(gen::with_spectrum(u, ev));
    CHECK(max_abs_diff(projector(e.vectors, 0), projector(UnitaryMatrix::checked(u), 0)) < 1e-10);
    CHECK(e.values[1] == doctest::Approx(-0.5).epsilon(1e-12));
  }
}

TEST_CASE("expi") {
  const UnitaryMatrix one = expi(pauli::y(), 0.0);
  CHECK(max_abs_diff(one.matrix(), ComplexMatrix::identity(2)) < 1e-15);

  // exp(i (pi/2) sigma_y) = i sigma_y
  const UnitaryMatrix r = expi(pauli::y() * Complex(std::numbers::pi / 2), 1.0);
  CHECK(std::abs(r(0, 0)) < 1e-12);
  CHECK(std::abs(r(0, 1) - Complex(1, 0)) < 1e-12);

  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen::dim(rng);
    const ComplexMatrix a = gen::hermitian(rng, n);
    const double s = gen::uniform(rng, -3, 3);
    const UnitaryMatrix u = expi(a, s) * expi(a, -s);
    CHECK(max_abs_diff(u.matrix(), ComplexMatrix::identity(n)) < 1e-10);
  }
}

TEST_CASE("expi matches a truncated power series for small generators") {
  Rng rng(12);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = gen::dim(rng);
    const ComplexMatrix a = gen::hermitian(rng, n, 0.05);
    ComplexMatrix term = ComplexMatrix::identity(n);
    ComplexMatrix sum = term;
    for (int m = 1; m < 30; ++m) {
      term = term * a * Complex(0, 1.0 / m);
      sum += term;
    }
    CHECK(max_abs_diff(expi(a, 1.0).matrix(), sum) < 1e-13);
  }
}

TEST_CASE("principal log") {
  const UnitaryLog z = principal_log_unitary(UnitaryMatrix::identity(3));
  CHECK(z.generator.max_abs() < 1e-14);

  const double t = std::numbers::pi / 3;
  ComplexMatrix d(2);
  d(0, 0) = std::polar(1.0, t);
  d(1, 1) = std::polar(1.0, -t);
  const UnitaryLog l = principal_log_unitary(UnitaryMatrix::checked(d));
  CHECK(l.generator(0, 0).real() == doctest::Approx(t));
  CHECK(l.generator(1, 1).real() == doctest::Approx(-t));
  CHECK_FALSE(l.branch_ambiguous);

  ComplexMatrix minus = ComplexMatrix::identity(2) * Complex(-1);
  CHECK(principal_log_unitary(UnitaryMatrix::checked(minus)).branch_ambiguous);

  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = gen::dim(rng, 2, 6);
    const UnitaryMatrix u = UnitaryMatrix::checked(gen::unitary(rng, n));
    const UnitaryLog g = principal_log_unitary(u);
    if (g.branch_ambiguous) continue;
    CHECK(g.generator.is_hermitian(1e-10));
    CHECK(max_abs_diff(expi(g.generator, 1.0).matrix(), u.matrix()) < 1e-9);
  }
}

TEST_CASE("unitary check") {
  ComplexMatrix m = ComplexMatrix::identity(2);
  m(0, 0) = 1.1;
  CHECK_THROWS_AS(UnitaryMatrix::checked(m), InvalidArgument);
}

TEST_CASE("density matrix validation") {
  ComplexMatrix m = ComplexMatrix::identity(2) * Complex(0.5);
  CHECK_NOTHROW(DensityMatrix::from_matrix(m));
  m(0, 0) = 0.6;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), InvalidArgument);  // trace
  m(0, 0) = 1.1;
  m(1, 1) = -0.1;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(m), InvalidArgument);  // negative
  ComplexMatrix nh = ComplexMatrix::identity(2) * Complex(0.5);
  nh(0, 1) = 0.1;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(nh), InvalidArgument);

  double min_ev = 0;
  const DensityMatrix r = DensityMatrix::repaired(ComplexMatrix::diagonal(std::vector<double>{1.2, -0.1}), &min_ev);
  CHECK(min_ev == doctest::Approx(-0.1 / 1.1));  // after trace renormalization
  CHECK(std::abs(r.matrix().trace() - Complex(1.0)) < 1e-14);
  CHECK(r.eigen().values[1] >= 0.0);
}

TEST_CASE("property: random densities are valid states") {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = gen::dim(rng);
    const DensityMatrix a = random_density(n, HilbertSchmidt{}, rng);
    const DensityMatrix b = random_density(n, NearPure{gen::uniform(rng, 0.0, 0.5)}, rng);
    for (const DensityMatrix* d : {&a, &b}) {
      CHECK(std::abs(d->matrix().trace() - Complex(1.0)) < 1e-10);
      CHECK(d->eigen().values[n - 1] >= -1e-10);
      CHECK(d->matrix().is_hermitian());
    }
  }
  const DensityMatrix pure = random_density(3, NearPure{0.0}, rng);
  CHECK(1.0 - pure.purity() == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("Hilbert-Schmidt qubit purity against an independent sampler") {
  // independent oracle: Ginibre G, rho = G G^dagger / Tr, drawn here directly
  const int samples = 100000;
  Rng a(21);
  Rng b(22);
  std::normal_distribution<double> g;
  double s1 = 0, s1sq = 0, s2 = 0, s2sq = 0;
  for (int i = 0; i < samples; ++i) {
    const double p1 = random_density(2, HilbertSchmidt{}, a).purity();
    s1 += p1;
    s1sq += p1 * p1;
    Complex m[2][2];
    for (auto& row : m)
      for (auto& x : row) x = {g(b), g(b)};
    double r00 = std::norm(m[0][0]) + std::norm(m[0][1]);
    double r11 = std::norm(m[1][0]) + std::norm(m[1][1]);
    Complex r01 = m[0][0] * std::conj(m[1][0]) + m[0][1] * std::conj(m[1][1]);
    const double tr = r00 + r11;
    const double p2 = (r00 * r00 + r11 * r11 + 2 * std::norm(r01)) / (tr * tr);
    s2 += p2;
    s2sq += p2 * p2;
  }
  const double m1 = s1 / samples, m2 = s2 / samples;
  const double v = (s1sq / samples - m1 * m1 + s2sq / samples - m2 * m2) / samples;
  CHECK(std::abs(m1 - m2) <= 3.0 * std::sqrt(v));
  CHECK(m1 == doctest::Approx(0.8).epsilon(0.005));  // 2N / (N^2 + 1)
}

TEST_CASE("Haar unitaries are unitary") {
  Rng rng(4);
  for (int n = 2; n <= 8; ++n) CHECK(haar_unitary(n, rng).unitarity_defect() < 1e-12);
}
