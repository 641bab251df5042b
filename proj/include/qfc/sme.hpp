#pragma once

// Conditioned evolution under continuous measurement of an observable X
// with rate k, isotropic environmental noise of strength beta and an
// applied Hamiltonian H (hbar = 1):
//
//   drho = -i[H,rho]dt - k[X,[X,rho]]dt + sqrt(2k)(X rho + rho X - 2<X> rho)dW
//          - (2N beta/(N-1)) (rho - I/N) dt
//   dr   = <X>dt + dW/sqrt(8k)
//
// The noise term equals -beta' sum_a [T_a,[T_a,rho]] over an orthonormal
// traceless Hermitian operator basis with beta' = beta/(N-1), which makes
// the entropy production of a pure state exactly 4 beta. For a qubit it is
// -(beta/2) sum_k [sigma_k,[sigma_k,rho]], contracting the Bloch vector at
// rate 4 beta.

#include <cstdint>
#include <functional>
#include <vector>

#include "qfc/observables.hpp"
#include "qfc/qlin.hpp"
#include "qfc/rng.hpp"

namespace qfc {

struct SmeParams {
  double k = 1.0;     // measurement strength
  double beta = 0.0;  // noise strength
  double dt = 1e-4;
  std::uint64_t seed = 0;

  // k, beta >= 0; dt > 0; dt*k <= 0.01 and dt*beta <= 0.01.
  void validate() const;
};

// Smallest eigenvalue below which a post-step state counts as a positivity
// violation (the state is still repaired by clipping).
inline constexpr double kPsdViolation = 1e-6;
// Smallest eigenvalue below which the step is rejected outright.
inline constexpr double kPsdReject = 1e-3;

struct TrajectoryCounters {
  long steps = 0;
  long psd_violations = 0;
  double worst_eigenvalue = 0.0;
  long clamp_events = 0;  // reduced z-equation only
};

struct TrajectoryState {
  double t = 0.0;
  DensityMatrix rho;
  double record = 0.0;  // integrated measurement record r(t)
  GaussianSource noise;
  TrajectoryCounters counters;

  static TrajectoryState start(const DensityMatrix& rho, std::uint64_t seed, double t0 = 0.0) {
    TrajectoryState s;
    s.t = t0;
    s.rho = rho;
    s.noise = GaussianSource(seed);
    return s;
  }
};

// Isotropic noise contribution to drho/dt.
ComplexMatrix isotropic_noise_rate(const ComplexMatrix& rho, double beta);

// Euler-Maruyama increment of the measurement and noise terms for a given
// Wiener increment (no Hamiltonian, no renormalization).
ComplexMatrix sme_increment(const ComplexMatrix& rho, const ComplexMatrix& x, double k, double beta, double dt,
                            double dW);

struct StepReport {
  double min_eigenvalue = 0.0;  // before repair
  double dr = 0.0;              // record increment (0 when not measuring)
};

// One step for a given dW: rho -> exp(-iH dt) rho exp(iH dt), then the
// measurement as the normalized map A rho A^dagger with
// A = I - k X^2 dt + sqrt(2k) X (dW + 2 sqrt(2k) <X> dt), then the noise as
// its exact channel rho -> e^{-g dt} rho + (1 - e^{-g dt}) I/N. To O(dt)
// this is the Euler-Maruyama increment of sme_increment, but it cannot
// leave the positive cone. Eigenvalues are re-audited after
// Hermitization and trace renormalization; the step is rejected
// (NumericalError) below -kPsdReject.
DensityMatrix sme_update(const DensityMatrix& rho, const ComplexMatrix& x, const ComplexMatrix& h, double k,
                         double beta, double dt, double dW, StepReport* report = nullptr);

// Advances `state` by one step of params.dt, drawing dW from the state's
// generator. With measure == false the measurement terms are switched off
// (noise and Hamiltonian still act).
void sme_step(TrajectoryState& state, const Observable& x, const ComplexMatrix& h, const SmeParams& params,
              bool measure = true);

// Reduced qubit equation for z = <sigma_z> under measurement of sigma_z
// with no feedback: dz = -4 beta z dt + sqrt(8k) (1 - z^2) dW.
double qubit_z_increment(double z, double k, double beta, double dt, double dW);
// Euler-Maruyama step clamped to [-1, 1]; clamp events are counted.
double qubit_z_step(double z, const SmeParams& params, GaussianSource& noise, TrajectoryCounters* counters = nullptr);

struct StepControl {
  Observable x;
  ComplexMatrix h;
  bool measure = true;
};

// Feedback loop contract: control() is called once before every step with
// the current state (which it may transform instantaneously, e.g. an ideal
// unitary) and returns what to measure and which Hamiltonian to apply. It
// never sees the noise of the step it configures.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual StepControl control(TrajectoryState& state) = 0;
};

using ObservablePolicy = std::function<Observable(const TrajectoryState&)>;
using HamiltonianPolicy = std::function<ComplexMatrix(const TrajectoryState&)>;

class CallbackController final : public Controller {
 public:
  CallbackController(ObservablePolicy x_policy, HamiltonianPolicy h_policy)
      : x_policy_(std::move(x_policy)), h_policy_(std::move(h_policy)) {}
  StepControl control(TrajectoryState& state) override {
    return {x_policy_(state), h_policy_(state), true};
  }

 private:
  ObservablePolicy x_policy_;
  HamiltonianPolicy h_policy_;
};

struct TrajectorySample {
  double t;
  double success;  // P = <0|rho|0>
  double linear_entropy;
  double record;
};

struct TrajectoryOptions {
  int stride = 0;            // sample every stride-th step from the first; 0 keeps none
  double average_from = 0.0;  // time from which P and L enter the averages
};

struct TrajectoryResult {
  TrajectoryState final_state;
  std::vector<TrajectorySample> samples;
  double mean_success = 0.0;
  double mean_linear_entropy = 0.0;
  long averaged_steps = 0;
};

TrajectoryResult simulate_trajectory(TrajectoryState initial, Controller& controller, const SmeParams& params,
                                     double t_final, const TrajectoryOptions& options = {});
TrajectoryResult simulate_trajectory(TrajectoryState initial, ObservablePolicy x_policy, HamiltonianPolicy h_policy,
                                     const SmeParams& params, double t_final, const TrajectoryOptions& options = {});

}  // namespace qfc
