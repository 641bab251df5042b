#include "qfc/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "qfc/errors.hpp"

namespace qfc {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 15, rel_tol, &err);
  if (!std::isfinite(v)) throw NumericalError("quadrature produced a non-finite value");
  return v;
}

double integrate_tanh(const std::function<double(double, double)>& f, double a, double b, double rel_tol) {
  if (!(a >= -1.0 && b <= 1.0 && a <= b)) throw InvalidArgument("integrate_tanh: need -1 <= a <= b <= 1");
  if (a == b) return 0.0;
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double ua = a <= -1.0 ? -inf : std::atanh(a);
  const double ub = b >= 1.0 ? inf : std::atanh(b);
  auto g = [&](double u) {
    if (!std::isfinite(u)) return 0.0;
    const double c = std::cosh(u);
    if (!std::isfinite(c)) return 0.0;
    const double sech2 = 1.0 / (c * c);
    return f(std::tanh(u), sech2) * sech2;
  };
  return integrate(g, ua, ub, rel_tol);
}

}  // namespace qfc
