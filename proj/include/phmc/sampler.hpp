#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "phmc/function_space.hpp"
#include "phmc/integrator.hpp"
#include "phmc/potentials.hpp"
#include "phmc/rng.hpp"

namespace phmc {

enum class HmcMode { Exact, Adjusted };

struct HmcConfig {
  IntegratorParams integrator{0.2, 12};
  HmcMode mode = HmcMode::Adjusted;
  bool flip_on_reject = false;
  PotentialPtr potential;
  std::shared_ptr<const CovarianceModel> covariance;
  // Exact mode for potentials without a constant gradient: integrate with
  // h / surrogate_refinement and accept unconditionally.
  bool exact_surrogate = false;
  std::size_t surrogate_refinement = 64;
};

// Throws std::invalid_argument when the configuration cannot run.
void validate(const HmcConfig& cfg);

struct StepOutcome {
  Field next;            // new position
  bool accepted = true;
  double delta_h = 0.0;  // +inf for a diverged trajectory
  PhaseState proposal;   // end of the proposed trajectory
  Field velocity;        // velocity carried out of the step (flipped on rejection if configured)
};

// Energy error of a Strang trajectory:
//   Phi(q_I) - Phi(q_0) + h^2/8 (|C^{1/2} DPhi(q_0)|^2 - |C^{1/2} DPhi(q_I)|^2)
//   - h sum_{i=1}^{I-1} <DPhi(q_i), v_i> - h/2 (<DPhi(q_0), v_0> + <DPhi(q_I), v_I>)
// Throws std::invalid_argument unless the trajectory has I + 1 states.
double delta_h(const std::vector<PhaseState>& traj, const IntegratorParams& p, const Potential& phi,
               const CovarianceModel& cov);
// Same quantity from a record that already carries the gradients.
double delta_h(const TrajectoryRecord& rec, const IntegratorParams& p, const Potential& phi);

// One transition with the randomness supplied: velocity v and uniform u.
// Deterministic in (q, v, u); u is ignored in exact mode.
StepOutcome transition(const Field& q, const Field& v, double u, const HmcConfig& cfg);

// Draws v ~ N(0, C), then runs the exact flow (closed form or surrogate).
StepOutcome exact_step(const Field& q, Rng& rng, const HmcConfig& cfg);
// Draws v ~ N(0, C) and u ~ U(0, 1), then Metropolis-adjusts the Strang proposal.
StepOutcome adjusted_step(const Field& q, Rng& rng, const HmcConfig& cfg);
// Dispatches on cfg.mode.
StepOutcome step(const Field& q, Rng& rng, const HmcConfig& cfg);

// Throws ChainError carrying the failing iteration.
std::vector<StepOutcome> run_chain(const Field& q0, std::size_t n_iters, Rng& rng, const HmcConfig& cfg);

}  // namespace phmc
