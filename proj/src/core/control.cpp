#include "qfc/control.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <sstream>
#include <thread>

namespace qfc {

void FeedbackConfig::validate() const {
  if (!(mu > 0.0)) throw InvalidArgument("feedback strength mu must be > 0 (or infinite)");
  if (!(threshold_eps >= 0.0 && threshold_eps < 1.0)) {
    std::ostringstream os;
    os << "threshold eps = " << threshold_eps << " outside [0, 1)";
    throw InvalidArgument(os.str());
  }
}

double max_angular_speed(double mu) { return std::numbers::sqrt2 * mu; }

double rotation_duration(double mu) { return std::numbers::pi / max_angular_speed(mu); }

double BlochVector::length() const { return std::sqrt(x * x + y * y + z * z); }

BlochVector bloch_vector(const DensityMatrix& rho) {
  if (rho.dim() != 2) throw InvalidArgument("Bloch vector requires a qubit");
  const Complex r01 = rho(0, 1);
  return {2.0 * r01.real(), -2.0 * r01.imag(), rho(0, 0).real() - rho(1, 1).real()};
}

ComplexMatrix rotation_hamiltonian(const BlochVector& axis, double omega) {
  ComplexMatrix h = pauli::x() * Complex(axis.x, 0.0);
  h += pauli::y() * Complex(axis.y, 0.0);
  h += pauli::z() * Complex(axis.z, 0.0);
  h *= Complex(0.5 * omega, 0.0);
  return h;
}

namespace {

void require_qubit(const TrajectoryState& state) {
  if (state.rho.dim() != 2) throw InvalidArgument("feedback policies are defined for a qubit only");
}

const UnitaryMatrix& qubit_mub() {
  static const UnitaryMatrix basis = mub_family(2).bases[1];
  return basis;
}

const Observable& sigma_z_observable() {
  static const Observable x = jz_observable(2, 2.0);
  return x;
}

}  // namespace

CommutingStep commuting_policy_step(TrajectoryState& state, CommutingPolicyState& policy, const FeedbackConfig& cfg,
                                    const SmeParams& params) {
  require_qubit(state);
  CommutingStep out;
  out.hamiltonian = ComplexMatrix(2);
  const double z = state.rho(0, 0).real() - state.rho(1, 1).real();
  const bool below = z <= -cfg.threshold_eps;

  if (cfg.ideal()) {
    if (below) {
      const ComplexMatrix sy = pauli::y();
      state.rho = DensityMatrix::repaired(sy * state.rho.matrix() * sy);
      ++policy.triggers;
      out.action = RotationAction::start_rotation;
    }
    return out;
  }

  if (!policy.rotating && below) {
    policy.rotating = true;
    policy.angle_done = 0.0;
    ++policy.triggers;
    out.action = RotationAction::start_rotation;
  } else if (policy.rotating) {
    out.action = RotationAction::rotating;
  }
  if (policy.rotating) {
    const double angle = std::min(max_angular_speed(cfg.mu) * params.dt, std::numbers::pi - policy.angle_done);
    out.hamiltonian = rotation_hamiltonian({0.0, 1.0, 0.0}, angle / params.dt);
    out.measure = cfg.measurement_during_rotation;
    policy.angle_done += angle;
    ++policy.rotation_steps;
    if (policy.angle_done >= std::numbers::pi - 1e-12) policy.rotating = false;
  }
  return out;
}

UnbiasedStep unbiased_policy_step(TrajectoryState& state, const FeedbackConfig& cfg, const SmeParams& params) {
  require_qubit(state);
  const Observable& sz = sigma_z_observable();
  if (cfg.ideal()) {
    const auto lambda = state.rho.eigen().eigenvalues();
    state.rho = DensityMatrix::diagonal(lambda);
    const Observable obs = unbiased_observable(state.rho, sz, qubit_mub());
    const double overlap = std::min(1.0, std::abs(state.rho.eigen().vectors(0, 0)));
    return {obs, ComplexMatrix(2), 2.0 * std::acos(overlap)};
  }

  const BlochVector b = bloch_vector(state.rho);
  const double perp = std::hypot(b.x, b.y);
  const double theta = std::atan2(perp, b.z);
  ComplexMatrix h(2);
  if (b.length() > 1e-12 && theta > 1e-12) {
    BlochVector axis{0.0, 1.0, 0.0};
    if (perp > 1e-15) axis = {b.y / perp, -b.x / perp, 0.0};
    const double omega = std::min(max_angular_speed(cfg.mu), theta / params.dt);
    h = rotation_hamiltonian(axis, omega);
  }
  // measure unbiased w.r.t. the state the measurement will act on, i.e.
  // after this step's rotation
  Observable obs = unbiased_observable(state.rho, sz, qubit_mub());
  if (h.max_abs() > 0.0) obs = obs.rebased(expi(h, -params.dt) * obs.basis());
  return {obs, h, theta};
}

QubitFeedback::QubitFeedback(const FeedbackConfig& cfg, const SmeParams& params)
    : cfg_(cfg), params_(params), sigma_z_(sigma_z_observable()) {
  cfg_.validate();
}

StepControl QubitFeedback::control(TrajectoryState& state) {
  if (cfg_.mode == FeedbackMode::commuting) {
    CommutingStep step = commuting_policy_step(state, commuting_, cfg_, params_);
    last_action_ = step.action;
    return {sigma_z_, step.hamiltonian, step.measure};
  }
  UnbiasedStep step = unbiased_policy_step(state, cfg_, params_);
  max_alignment_error_ = std::max(max_alignment_error_, cfg_.ideal() ? step.alignment_error : 0.0);
  return {std::move(step.observable), step.hamiltonian, true};
}

ClosedLoopResult run_closed_loop(const FeedbackConfig& cfg, const SmeParams& params, double t_final, int n_traj,
                                 const ClosedLoopOptions& options) {
  cfg.validate();
  params.validate();
  if (n_traj < 2) throw InvalidArgument("run_closed_loop: need at least 2 trajectories for a standard error");
  if (!(t_final > 0.0)) throw InvalidArgument("run_closed_loop: t_final must be > 0");
  if (!(options.burn_in_fraction >= 0.0 && options.burn_in_fraction < 1.0)) {
    throw InvalidArgument("run_closed_loop: burn-in fraction must lie in [0, 1)");
  }

  struct Member {
    double mean = 0.0;
    long triggers = 0;
    long psd = 0;
    double worst = 0.0;
    double align = 0.0;
    long steps = 0;
  };
  std::vector<Member> members(static_cast<size_t>(n_traj));

  auto run_one = [&](int i) {
    QubitFeedback ctl(cfg, params);
    TrajectoryState s = TrajectoryState::start(DensityMatrix::basis_state(2, 0), derive_seed(params.seed, i));
    TrajectoryOptions topt;
    topt.average_from = options.burn_in_fraction * t_final;
    const TrajectoryResult r = simulate_trajectory(std::move(s), ctl, params, t_final, topt);
    Member& m = members[static_cast<size_t>(i)];
    m.mean = r.mean_success;
    m.triggers = ctl.commuting_state().triggers;
    m.psd = r.final_state.counters.psd_violations;
    m.worst = r.final_state.counters.worst_eigenvalue;
    m.align = ctl.max_alignment_error();
    m.steps = r.final_state.counters.steps;
  };

  const int threads = std::clamp(options.threads, 1, n_traj);
  if (threads == 1) {
    for (int i = 0; i < n_traj; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(threads));
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (int i = next++; i < n_traj; i = next++) run_one(i);
        } catch (...) {
          errors[static_cast<size_t>(w)] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  ClosedLoopResult out;
  double sum = 0.0;
  for (const Member& m : members) {
    out.per_trajectory.push_back(m.mean);
    sum += m.mean;
    out.triggers += m.triggers;
    out.psd_violations += m.psd;
    out.worst_eigenvalue = std::min(out.worst_eigenvalue, m.worst);
    out.max_alignment_error = std::max(out.max_alignment_error, m.align);
    out.steps += m.steps;
  }
  out.mean_success = sum / n_traj;
  double ss = 0.0;
  for (double v : out.per_trajectory) ss += (v - out.mean_success) * (v - out.mean_success);
  out.stderr_success = std::sqrt(ss / (n_traj - 1) / n_traj);
  out.trigger_rate = static_cast<double>(out.triggers) / (n_traj * t_final);
  return out;
}

}  // namespace qfc
