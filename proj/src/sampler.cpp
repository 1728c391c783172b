#include "phmc/sampler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "phmc/errors.hpp"

namespace phmc {

void validate(const HmcConfig& cfg) {
  if (!cfg.potential) throw std::invalid_argument("hmc config: no potential");
  if (!cfg.covariance) throw std::invalid_argument("hmc config: no covariance");
  if (cfg.mode == HmcMode::Exact) {
    const bool affine =
        cfg.potential->constant_gradient(cfg.covariance->native_representation(), cfg.covariance->size())
            .has_value();
    if (!affine && !cfg.exact_surrogate) {
      throw std::invalid_argument("hmc config: exact mode needs a constant-gradient potential or exact_surrogate "
                                  "(potential '" + cfg.potential->name() + "')");
    }
    if (cfg.exact_surrogate && cfg.surrogate_refinement < 1) {
      throw std::invalid_argument("hmc config: surrogate_refinement must be >= 1");
    }
  }
}

double delta_h(const TrajectoryRecord& rec, const IntegratorParams& p, const Potential& phi) {
  const std::size_t steps = p.steps();
  if (rec.states.size() != steps + 1 || rec.gradients.size() != steps + 1 || rec.preconditioned.size() != steps + 1) {
    throw std::invalid_argument("delta_h: trajectory has " + std::to_string(rec.states.size()) +
                                " states, expected " + std::to_string(steps + 1));
  }
  const double h = p.h();
  const PhaseState& first = rec.states.front();
  const PhaseState& last = rec.states.back();

  const double boundary_energy =
      l2_inner(rec.gradients.front(), rec.preconditioned.front()) - l2_inner(rec.gradients.back(), rec.preconditioned.back());

  double interior = 0.0;
  for (std::size_t i = 1; i < steps; ++i) interior += l2_inner(rec.gradients[i], rec.states[i].v);
  const double ends = l2_inner(rec.gradients.front(), first.v) + l2_inner(rec.gradients.back(), last.v);

  const double dh = phi.evaluate(last.q) - phi.evaluate(first.q) + (h * h / 8.0) * boundary_energy -
                    h * interior - 0.5 * h * ends;
  return std::isnan(dh) ? std::numeric_limits<double>::infinity() : dh;
}

double delta_h(const std::vector<PhaseState>& traj, const IntegratorParams& p, const Potential& phi,
               const CovarianceModel& cov) {
  if (traj.size() != p.steps() + 1) {
    throw std::invalid_argument("delta_h: trajectory has " + std::to_string(traj.size()) + " states, expected " +
                                std::to_string(p.steps() + 1));
  }
  TrajectoryRecord rec;
  rec.states = traj;
  for (const PhaseState& s : traj) {
    if (is_diverged(s.q) || is_diverged(s.v)) return std::numeric_limits<double>::infinity();
    rec.gradients.push_back(phi.gradient(s.q));
    rec.preconditioned.push_back(apply_covariance(cov, rec.gradients.back()));
  }
  return delta_h(rec, p, phi);
}

namespace {

StepOutcome exact_transition(const Field& q, const Field& v, const HmcConfig& cfg) {
  const PhaseState start{q, v};
  StepOutcome out;
  if (auto b = cfg.potential->constant_gradient(q.repr, q.size())) {
    out.proposal = exact_flow_affine(start, cfg.integrator.T(), *b, *cfg.covariance);
  } else {
    const std::size_t refine = cfg.surrogate_refinement;
    const IntegratorParams fine(cfg.integrator.h() / static_cast<double>(refine), cfg.integrator.steps() * refine);
    out.proposal = trajectory(start, fine, *cfg.potential, *cfg.covariance).back();
  }
  out.next = out.proposal.q;
  out.velocity = out.proposal.v;
  out.accepted = true;
  out.delta_h = 0.0;
  return out;
}

StepOutcome adjusted_transition(const Field& q, const Field& v, double u, const HmcConfig& cfg) {
  const PhaseState start{q, v};
  StepOutcome out;
  try {
    const TrajectoryRecord rec = trajectory_with_gradients(start, cfg.integrator, *cfg.potential, *cfg.covariance);
    out.delta_h = delta_h(rec, cfg.integrator, *cfg.potential);
    out.proposal = rec.states.back();
  } catch (const DivergenceError&) {
    out.delta_h = std::numeric_limits<double>::infinity();
    out.proposal = start;
  }
  out.accepted = u <= std::exp(-out.delta_h);
  if (out.accepted) {
    out.next = out.proposal.q;
    out.velocity = out.proposal.v;
  } else {
    out.next = q;
    out.velocity = v;
    if (cfg.flip_on_reject) {
      for (double& x : out.velocity.data) x = -x;
    }
  }
  return out;
}

Field draw_velocity(const Field& q, Rng& rng, const HmcConfig& cfg) {
  return to_representation(sample_prior(*cfg.covariance, rng), q.repr);
}

}  // namespace

StepOutcome transition(const Field& q, const Field& v, double u, const HmcConfig& cfg) {
  validate(cfg);
  if (q.size() != cfg.covariance->size()) {
    throw DimensionMismatch("transition: state dimension " + std::to_string(q.size()) + " vs covariance dimension " +
                            std::to_string(cfg.covariance->size()));
  }
  require_compatible(q, v, "transition");
  return cfg.mode == HmcMode::Exact ? exact_transition(q, v, cfg) : adjusted_transition(q, v, u, cfg);
}

StepOutcome exact_step(const Field& q, Rng& rng, const HmcConfig& cfg) {
  if (cfg.mode != HmcMode::Exact) throw std::invalid_argument("exact_step: config is not in exact mode");
  const Field v = draw_velocity(q, rng, cfg);
  return transition(q, v, 0.0, cfg);
}

StepOutcome adjusted_step(const Field& q, Rng& rng, const HmcConfig& cfg) {
  if (cfg.mode != HmcMode::Adjusted) throw std::invalid_argument("adjusted_step: config is not in adjusted mode");
  const Field v = draw_velocity(q, rng, cfg);
  const double u = uniform_open01(rng);
  return transition(q, v, u, cfg);
}

StepOutcome step(const Field& q, Rng& rng, const HmcConfig& cfg) {
  return cfg.mode == HmcMode::Exact ? exact_step(q, rng, cfg) : adjusted_step(q, rng, cfg);
}

std::vector<StepOutcome> run_chain(const Field& q0, std::size_t n_iters, Rng& rng, const HmcConfig& cfg) {
  if (n_iters < 1) throw std::invalid_argument("run_chain: n_iters must be >= 1");
  validate(cfg);
  std::vector<StepOutcome> outcomes;
  outcomes.reserve(n_iters);
  Field q = q0;
  for (std::size_t it = 1; it <= n_iters; ++it) {
    try {
      outcomes.push_back(step(q, rng, cfg));
    } catch (const DivergenceError& e) {
      throw ChainError("iteration " + std::to_string(it) + ": " + e.what(), it, true);
    } catch (const std::exception& e) {
      throw ChainError("iteration " + std::to_string(it) + ": " + e.what(), it, false);
    }
    q = outcomes.back().next;
  }
  return outcomes;
}

}  // namespace phmc
