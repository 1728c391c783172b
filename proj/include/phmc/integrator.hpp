#pragma once

#include <cstddef>
#include <vector>

#include "phmc/function_space.hpp"
#include "phmc/potentials.hpp"

namespace phmc {

struct PhaseState {
  Field q;
  Field v;

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

// Step size h and step count I; the trajectory length T = I h is derived.
class IntegratorParams {
 public:
  IntegratorParams(double h, std::size_t steps);

  double h() const noexcept { return h_; }
  std::size_t steps() const noexcept { return steps_; }
  double T() const noexcept { return h_ * static_cast<double>(steps_); }

 private:
  double h_;
  std::size_t steps_;
};

// Any coordinate beyond this magnitude (or non-finite) counts as a blow-up.
inline constexpr double kDivergenceThreshold = 1e100;
bool is_diverged(const Field& f) noexcept;

// Flow of dq/dt = v, dv/dt = -q: a rotation by angle t in every mode.
PhaseState rotate_flow(const PhaseState& x, double t);

// Flow of dq/dt = 0, dv/dt = -C DPhi(q).
PhaseState kick_flow(const PhaseState& x, double t, const Potential& phi, const CovarianceModel& cov);

// psi_h = kick(h/2) o rotate(h) o kick(h/2).
PhaseState strang_step(const PhaseState& x, double h, const Potential& phi, const CovarianceModel& cov);

// Trajectory states together with DPhi and C DPhi at every q_i, which the
// integrator computes anyway and the energy error reuses.
struct TrajectoryRecord {
  std::vector<PhaseState> states;
  std::vector<Field> gradients;
  std::vector<Field> preconditioned;
};

// [x, psi_h(x), ..., psi_h^I(x)]; throws DivergenceError naming the step.
std::vector<PhaseState> trajectory(const PhaseState& x, const IntegratorParams& p, const Potential& phi,
                                   const CovarianceModel& cov);
TrajectoryRecord trajectory_with_gradients(const PhaseState& x, const IntegratorParams& p, const Potential& phi,
                                           const CovarianceModel& cov);

// Exact Hamiltonian flow for a constant gradient DPhi = b:
//   q(T) = cos T (q0 + C b) + sin T v0 - C b
//   v(T) = -sin T (q0 + C b) + cos T v0
PhaseState exact_flow_affine(const PhaseState& x, double T, const Field& b, const CovarianceModel& cov);

}  // namespace phmc
