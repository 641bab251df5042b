#pragma once

// Closed-loop feedback for a measured qubit. Target state |0> (z = +1);
// success probability P = <0|rho|0> = (1 + z)/2. The measured spectrum is
// that of sigma_z (eigenvalues +1, -1) for both policies.
//
// Feedback strength mu caps Tr[H^2] <= mu^2, so the fastest qubit rotation
// is H = (mu/sqrt2) n.sigma with Bloch angular speed sqrt2 mu.

#include <cstdint>
#include <limits>
#include <vector>

#include "qfc/observables.hpp"
#include "qfc/sme.hpp"

namespace qfc {

enum class FeedbackMode { commuting, unbiased };

struct FeedbackConfig {
  FeedbackMode mode = FeedbackMode::unbiased;
  double mu = std::numeric_limits<double>::infinity();  // infinite = ideal
  double threshold_eps = 0.0;                          // commuting mode: trigger at z <= -eps
  bool measurement_during_rotation = false;

  bool ideal() const { return mu == std::numeric_limits<double>::infinity(); }
  void validate() const;
};

// Wall time of a pi rotation at full strength: pi / (sqrt2 mu).
double rotation_duration(double mu);
// Bloch angular speed of the strongest allowed Hamiltonian: sqrt2 mu.
double max_angular_speed(double mu);

struct BlochVector {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double length() const;
};
BlochVector bloch_vector(const DensityMatrix& rho);
// Hamiltonian (omega/2) n.sigma, rotating the Bloch vector about unit axis n
// at angular speed omega.
ComplexMatrix rotation_hamiltonian(const BlochVector& axis, double omega);

enum class RotationAction { none, start_rotation, rotating };

struct CommutingPolicyState {
  bool rotating = false;
  double angle_done = 0.0;
  long triggers = 0;
  long rotation_steps = 0;
};

struct CommutingStep {
  RotationAction action = RotationAction::none;
  ComplexMatrix hamiltonian;
  bool measure = true;
};

// Decides the next step of the threshold pi-rotation policy. Ideal mu: a
// triggered rotation (sigma_y conjugation, z -> -z) is applied to `state`
// immediately. Finite mu: returns the sigma_y Hamiltonian for the step and
// whether the measurement stays on; the final step of a rotation is
// shortened in angle so the total is exactly pi.
CommutingStep commuting_policy_step(TrajectoryState& state, CommutingPolicyState& policy, const FeedbackConfig& cfg,
                                    const SmeParams& params);

struct UnbiasedStep {
  Observable observable;
  ComplexMatrix hamiltonian;
  double alignment_error = 0.0;  // angle between dominant eigenvector and target, after any ideal rotation
};

// Ideal mu: rotates rho so its dominant eigenvector is |0> and measures
// sigma_z-spectrum along an axis unbiased w.r.t. the new eigenbasis.
// Finite mu: measures unbiased w.r.t. the current eigenbasis and returns a
// Hamiltonian turning the Bloch vector toward +z about r x z at speed
// sqrt2 mu, capped so the step does not overshoot. A zero Bloch vector
// yields no Hamiltonian.
UnbiasedStep unbiased_policy_step(TrajectoryState& state, const FeedbackConfig& cfg, const SmeParams& params);

// Controller adapter for either policy; keeps per-trajectory policy state.
class QubitFeedback final : public Controller {
 public:
  QubitFeedback(const FeedbackConfig& cfg, const SmeParams& params);

  StepControl control(TrajectoryState& state) override;

  const CommutingPolicyState& commuting_state() const { return commuting_; }
  RotationAction last_action() const { return last_action_; }
  double max_alignment_error() const { return max_alignment_error_; }

 private:
  FeedbackConfig cfg_;
  SmeParams params_;
  Observable sigma_z_;
  CommutingPolicyState commuting_;
  RotationAction last_action_ = RotationAction::none;
  double max_alignment_error_ = 0.0;
};

struct ClosedLoopOptions {
  double burn_in_fraction = 0.2;
  int threads = 1;
};

struct ClosedLoopResult {
  double mean_success = 0.0;
  double stderr_success = 0.0;
  std::vector<double> per_trajectory;
  long triggers = 0;
  double trigger_rate = 0.0;  // rotations per unit time, averaged over the ensemble
  long psd_violations = 0;
  double worst_eigenvalue = 0.0;
  double max_alignment_error = 0.0;
  long steps = 0;
};

// n_traj independent trajectories from |0>, member i seeded with
// derive_seed(params.seed, i). Reports the ensemble mean of each
// trajectory's post-burn-in time average of P and its standard error.
ClosedLoopResult run_closed_loop(const FeedbackConfig& cfg, const SmeParams& params, double t_final, int n_traj,
                                 const ClosedLoopOptions& options = {});

}  // namespace qfc
