#include "qfc/sme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qfc {

void SmeParams::validate() const {
  std::ostringstream os;
  if (!(k >= 0.0) || !std::isfinite(k)) {
    os << "measurement strength k = " << k << " must be finite and >= 0";
  } else if (!(beta >= 0.0) || !std::isfinite(beta)) {
    os << "noise strength beta = " << beta << " must be finite and >= 0";
  } else if (!(dt > 0.0)) {
    os << "time step dt = " << dt << " must be > 0";
  } else if (dt * k > 0.01 || dt * beta > 0.01) {
    os << "time step dt = " << dt << " too large: need dt*k <= 0.01 and dt*beta <= 0.01";
  } else {
    return;
  }
  throw InvalidArgument(os.str());
}

ComplexMatrix isotropic_noise_rate(const ComplexMatrix& rho, double beta) {
  const int n = rho.dim();
  const double gamma = 2.0 * n * beta / (n - 1);
  ComplexMatrix out = rho * Complex(-gamma, 0.0);
  for (int i = 0; i < n; ++i) out(i, i) += gamma / n;
  return out;
}

ComplexMatrix sme_increment(const ComplexMatrix& rho, const ComplexMatrix& x, double k, double beta, double dt,
                            double dW) {
  const int n = rho.dim();
  ComplexMatrix d(n);
  if (k > 0.0) {
    const ComplexMatrix xr = x * rho;
    const ComplexMatrix rx = rho * x;
    const ComplexMatrix c = xr - rx;
    ComplexMatrix dephase = x * c - c * x;
    dephase *= Complex(-k * dt, 0.0);
    d += dephase;
    const double mean_x = real_trace_product(x, rho);
    ComplexMatrix innov = xr + rx;
    innov -= rho * Complex(2.0 * mean_x, 0.0);
    innov *= Complex(std::sqrt(2.0 * k) * dW, 0.0);
    d += innov;
  }
  if (beta > 0.0) {
    ComplexMatrix noise = isotropic_noise_rate(rho, beta);
    noise *= Complex(dt, 0.0);
    d += noise;
  }
  return d;
}

DensityMatrix sme_update(const DensityMatrix& rho, const ComplexMatrix& x, const ComplexMatrix& h, double k,
                         double beta, double dt, double dW, StepReport* report) {
  const int n = rho.dim();
  ComplexMatrix r = rho.matrix();
  if (h.max_abs() > 0.0) {
    r = conjugate(expi(h, -dt), r);
  }
  double mean_x = 0.0;
  if (k > 0.0) {
    // normalized Kraus form of the Euler step: A = I - k X^2 dt + sqrt(2k) X dY
    // with dY = dW + 2 sqrt(2k) <X> dt. Agrees with the increment above to
    // O(dt) and keeps rho positive.
    mean_x = real_trace_product(x, r);
    const double gain = std::sqrt(2.0 * k);
    const double dy = dW + 2.0 * gain * mean_x * dt;
    ComplexMatrix a = ComplexMatrix::identity(n);
    a -= (x * x) * Complex(k * dt, 0.0);
    a += x * Complex(gain * dy, 0.0);
    r = a * r * a.adjoint();
  }
  if (beta > 0.0) {
    const double keep = std::exp(-2.0 * n * beta / (n - 1) * dt);
    const Complex tr = r.trace();
    r *= Complex(keep, 0.0);
    for (int i = 0; i < n; ++i) r(i, i) += (1.0 - keep) * tr / static_cast<double>(n);
  }

  double lowest = 0.0;
  DensityMatrix next = DensityMatrix::repaired(r, &lowest);
  if (lowest < -kPsdReject) {
    std::ostringstream os;
    os << "SME step rejected: eigenvalue " << lowest << " after step of dt = " << dt
       << " (reduce the time step)";
    throw NumericalError(os.str());
  }
  if (report) {
    report->min_eigenvalue = lowest;
    report->dr = k > 0.0 ? mean_x * dt + dW / std::sqrt(8.0 * k) : 0.0;
  }
  return next;
}

void sme_step(TrajectoryState& state, const Observable& x, const ComplexMatrix& h, const SmeParams& params,
              bool measure) {
  const double dW = std::sqrt(params.dt) * state.noise();
  StepReport rep;
  const double k = measure ? params.k : 0.0;
  state.rho = sme_update(state.rho, x.matrix(), h, k, params.beta, params.dt, dW, &rep);
  state.t += params.dt;
  state.record += rep.dr;
  ++state.counters.steps;
  if (rep.min_eigenvalue < -kPsdViolation) ++state.counters.psd_violations;
  state.counters.worst_eigenvalue = std::min(state.counters.worst_eigenvalue, rep.min_eigenvalue);
}

double qubit_z_increment(double z, double k, double beta, double dt, double dW) {
  return -4.0 * beta * z * dt + std::sqrt(8.0 * k) * (1.0 - z * z) * dW;
}

double qubit_z_step(double z, const SmeParams& params, GaussianSource& noise, TrajectoryCounters* counters) {
  const double dW = std::sqrt(params.dt) * noise();
  double next = z + qubit_z_increment(z, params.k, params.beta, params.dt, dW);
  if (next > 1.0 || next < -1.0) {
    next = std::clamp(next, -1.0, 1.0);
    if (counters) ++counters->clamp_events;
  }
  if (counters) ++counters->steps;
  return next;
}

TrajectoryResult simulate_trajectory(TrajectoryState initial, Controller& controller, const SmeParams& params,
                                     double t_final, const TrajectoryOptions& options) {
  params.validate();
  if (!(t_final > initial.t)) throw InvalidArgument("simulate_trajectory: t_final must exceed the initial time");
  const long n_steps = std::lround((t_final - initial.t) / params.dt);

  TrajectoryResult out;
  out.final_state = std::move(initial);
  TrajectoryState& s = out.final_state;
  const double t0 = s.t;
  if (options.stride > 0) out.samples.reserve(static_cast<size_t>(n_steps / options.stride + 1));

  double sum_p = 0.0;
  double sum_l = 0.0;
  // P and L are sampled after the controller acts (so an instantaneous
  // correction counts) and before the step it configured.
  for (long i = 0; i < n_steps; ++i) {
    const StepControl ctl = [&]() -> StepControl {
      try {
        return controller.control(s);
      } catch (const std::exception& e) {
        std::ostringstream os;
        os << "feedback policy failed at t = " << s.t << ": " << e.what();
        throw Error(os.str());
      }
    }();
    const double p = s.rho.population(0);
    const double l = 1.0 - s.rho.purity();
    if (s.t >= options.average_from) {
      sum_p += p;
      sum_l += l;
      ++out.averaged_steps;
    }
    if (options.stride > 0 && i % options.stride == 0) {
      out.samples.push_back({s.t, p, l, s.record});
    }
    sme_step(s, ctl.x, ctl.h, params, ctl.measure);
    // avoid accumulating rounding in t
    s.t = t0 + (i + 1) * params.dt;
  }
  if (out.averaged_steps > 0) {
    out.mean_success = sum_p / out.averaged_steps;
    out.mean_linear_entropy = sum_l / out.averaged_steps;
  }
  return out;
}

TrajectoryResult simulate_trajectory(TrajectoryState initial, ObservablePolicy x_policy, HamiltonianPolicy h_policy,
                                     const SmeParams& params, double t_final, const TrajectoryOptions& options) {
  CallbackController ctl(std::move(x_policy), std::move(h_policy));
  return simulate_trajectory(std::move(initial), ctl, params, t_final, options);
}

}  // namespace qfc
