#include "phmc/integrator.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "phmc/errors.hpp"
#include "phmc/kernels.hpp"

namespace phmc {

IntegratorParams::IntegratorParams(double h, std::size_t steps) : h_(h), steps_(steps) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("integrator: step size h must be positive");
  if (steps < 1) throw std::invalid_argument("integrator: need at least one step");
}

bool is_diverged(const Field& f) noexcept {
  for (double x : f.data) {
    if (!(std::abs(x) <= kDivergenceThreshold)) return true;
  }
  return false;
}

namespace {

void rotate_in_place(Field& q, Field& v, double c, double s) {
  Field q_old = q;
  kernels::lincomb(q.data, c, q_old.data, s, v.data);
  kernels::lincomb(v.data, c, v.data, -s, q_old.data);
}

void require_state(const PhaseState& x) { require_compatible(x.q, x.v, "phase state"); }

}  // namespace

PhaseState rotate_flow(const PhaseState& x, double t) {
  require_state(x);
  PhaseState out = x;
  rotate_in_place(out.q, out.v, std::cos(t), std::sin(t));
  return out;
}

PhaseState kick_flow(const PhaseState& x, double t, const Potential& phi, const CovarianceModel& cov) {
  require_state(x);
  PhaseState out = x;
  const Field force = preconditioned_gradient(phi, cov, x.q);
  kernels::axpy(out.v.data, -t, force.data);
  return out;
}

PhaseState strang_step(const PhaseState& x, double h, const Potential& phi, const CovarianceModel& cov) {
  require_state(x);
  PhaseState out = x;
  const Field f0 = preconditioned_gradient(phi, cov, out.q);
  kernels::axpy(out.v.data, -0.5 * h, f0.data);
  rotate_in_place(out.q, out.v, std::cos(h), std::sin(h));
  const Field f1 = preconditioned_gradient(phi, cov, out.q);
  kernels::axpy(out.v.data, -0.5 * h, f1.data);
  return out;
}

TrajectoryRecord trajectory_with_gradients(const PhaseState& x, const IntegratorParams& p, const Potential& phi,
                                           const CovarianceModel& cov) {
  require_state(x);
  const std::size_t steps = p.steps();
  const double h = p.h();
  const double c = std::cos(h);
  const double s = std::sin(h);

  TrajectoryRecord rec;
  rec.states.reserve(steps + 1);
  rec.gradients.reserve(steps + 1);
  rec.preconditioned.reserve(steps + 1);

  rec.states.push_back(x);
  rec.gradients.push_back(phi.gradient(x.q));
  rec.preconditioned.push_back(apply_covariance(cov, rec.gradients.back()));

  for (std::size_t i = 1; i <= steps; ++i) {
    PhaseState next = rec.states.back();
    kernels::axpy(next.v.data, -0.5 * h, rec.preconditioned.back().data);
    rotate_in_place(next.q, next.v, c, s);
    if (is_diverged(next.q)) {
      throw DivergenceError("trajectory diverged at step " + std::to_string(i), i);
    }
    Field grad = phi.gradient(next.q);
    Field force = apply_covariance(cov, grad);
    kernels::axpy(next.v.data, -0.5 * h, force.data);
    if (is_diverged(next.v) || is_diverged(force)) {
      throw DivergenceError("trajectory diverged at step " + std::to_string(i), i);
    }
    rec.states.push_back(std::move(next));
    rec.gradients.push_back(std::move(grad));
    rec.preconditioned.push_back(std::move(force));
  }
  return rec;
}

std::vector<PhaseState> trajectory(const PhaseState& x, const IntegratorParams& p, const Potential& phi,
                                   const CovarianceModel& cov) {
  return trajectory_with_gradients(x, p, phi, cov).states;
}

PhaseState exact_flow_affine(const PhaseState& x, double T, const Field& b, const CovarianceModel& cov) {
  require_state(x);
  require_compatible(x.q, b, "exact_flow_affine");
  const Field cb = apply_covariance(cov, b);
  Field shifted = x.q;
  kernels::axpy(shifted.data, 1.0, cb.data);

  const double c = std::cos(T);
  const double s = std::sin(T);
  PhaseState out = x;
  kernels::lincomb(out.q.data, c, shifted.data, s, x.v.data);
  kernels::axpy(out.q.data, -1.0, cb.data);
  kernels::lincomb(out.v.data, -s, shifted.data, c, x.v.data);
  return out;
}

}  // namespace phmc
