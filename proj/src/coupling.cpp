#include "phmc/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "phmc/errors.hpp"
#include "phmc/kernels.hpp"

namespace phmc {

namespace {

double norm_s(const Field& f, double s) { return s == 0.0 ? l2_norm(f) : sobolev_norm(f, s); }
double inner_s(const Field& f, const Field& g, double s) { return s == 0.0 ? l2_inner(f, g) : sobolev_inner(f, g, s); }

Field difference(const Field& a, const Field& b) {
  require_compatible(a, b, "difference");
  Field out(a.repr, std::vector<double>(a.size()));
  kernels::lincomb(out.data, 1.0, a.data, -1.0, b.data);
  return out;
}

Field add_scaled(const Field& a, double t, const Field& b) {
  require_compatible(a, b, "add_scaled");
  Field out(a.repr, std::vector<double>(a.size()));
  kernels::lincomb(out.data, 1.0, a.data, t, b.data);
  return out;
}

CouplingRecord make_record(std::size_t iter, const Field& x, const Field& y, double s) {
  CouplingRecord r;
  r.iter = iter;
  r.distance_l2 = l2_distance(x, y);
  r.distance_s = s == 0.0 ? r.distance_l2 : sobolev_distance(x, y, s);
  return r;
}

}  // namespace

bool states_coalesced(const Field& x, const Field& y, double eps) {
  require_compatible(x, y, "states_coalesced");
  if (eps <= 0.0) return x.data == y.data;
  return l2_distance(x, y) <= eps;
}

CoupledStepResult coupled_step(const CoupledState& s, Rng& rng, const HmcConfig& cfg, std::size_t iter,
                               const CouplingOptions& opts) {
  require_compatible(s.x, s.y, "coupled_step");
  validate(cfg);
  const Field v = to_representation(sample_prior(*cfg.covariance, rng), s.x.repr);
  const double u = uniform_open01(rng);
  StepOutcome ox = transition(s.x, v, u, cfg);
  StepOutcome oy = transition(s.y, v, u, cfg);

  CoupledStepResult out;
  out.record = make_record(iter, ox.next, oy.next, opts.sobolev_index);
  out.record.accepted_x = ox.accepted;
  out.record.accepted_y = oy.accepted;
  out.record.delta_h_x = ox.delta_h;
  out.record.delta_h_y = oy.delta_h;
  out.state = {std::move(ox.next), std::move(oy.next)};
  return out;
}

CouplingTrace run_coupling(const Field& x0, const Field& y0, std::size_t n_iters, Rng& rng, const HmcConfig& cfg,
                           const CouplingOptions& opts) {
  require_compatible(x0, y0, "run_coupling");
  validate(cfg);
  CouplingTrace trace;
  trace.sobolev_index = opts.sobolev_index;
  trace.records.reserve(n_iters + 1);
  trace.records.push_back(make_record(0, x0, y0, opts.sobolev_index));
  if (states_coalesced(x0, y0, opts.coalescence_eps)) {
    trace.coalescence_iter = 0;
    return trace;
  }

  CoupledState state{x0, y0};
  for (std::size_t it = 1; it <= n_iters; ++it) {
    try {
      CoupledStepResult r = coupled_step(state, rng, cfg, it, opts);
      state = std::move(r.state);
      trace.records.push_back(r.record);
    } catch (const DivergenceError& e) {
      throw ChainError("iteration " + std::to_string(it) + ": " + e.what(), it, true);
    } catch (const std::exception& e) {
      throw ChainError("iteration " + std::to_string(it) + ": " + e.what(), it, false);
    }
    if (states_coalesced(state.x, state.y, opts.coalescence_eps)) {
      trace.coalescence_iter = it;
      break;
    }
  }
  return trace;
}

stats::LinearFit fit_log_distance(const CouplingTrace& trace, const FitWindow& window) {
  if (trace.records.empty()) throw std::invalid_argument("contraction fit: empty trace");
  const double floor = window.relative_floor * trace.records.front().distance_l2;
  std::vector<double> xs, ys;
  for (const CouplingRecord& r : trace.records) {
    if (r.iter < window.first_iter || r.iter > window.last_iter) continue;
    if (trace.coalescence_iter && r.iter >= *trace.coalescence_iter) break;
    if (!(r.distance_l2 > 0.0) || r.distance_l2 < floor) continue;
    xs.push_back(static_cast<double>(r.iter));
    ys.push_back(std::log(r.distance_l2));
  }
  if (xs.size() < 10) {
    throw std::invalid_argument("contraction fit: insufficient data (" + std::to_string(xs.size()) +
                                " usable records, need 10)");
  }
  return stats::linear_fit(xs, ys);
}

double estimate_contraction_rate(const CouplingTrace& trace, const FitWindow& window) {
  return std::exp(fit_log_distance(trace, window).slope);
}

// ---------------------------------------------------------------------------

AssumptionReport audit_assumptions(const Potential& phi, const CovarianceModel& cov, const IntegratorParams& p,
                                   std::size_t n_pairs, Rng& rng, const AuditOptions& opts) {
  if (n_pairs < 100) throw std::invalid_argument("audit_assumptions: n_pairs must be >= 100");
  const double s = opts.sobolev_index;
  const std::size_t n = cov.size();
  const Representation repr = cov.native_representation();

  struct Point {
    Field x;
    Field cg;  // C DPhi(x)
  };
  auto make_point = [&](Field x) {
    Field cg = preconditioned_gradient(phi, cov, x);
    return Point{std::move(x), std::move(cg)};
  };

  double L = 0.0;
  double zeta = std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  std::vector<std::pair<double, double>> growth;  // (|C DPhi(x)|, |x|)

  auto visit = [&](const Point& a, const Point& b) {
    const Field z = difference(a.x, b.x);
    const double dz = norm_s(z, s);
    if (!(dz > 0.0)) return;
    const Field dc = difference(a.cg, b.cg);
    L = std::max(L, norm_s(dc, s) / dz);
    zeta = std::min(zeta, 1.0 + inner_s(dc, z, s) / (dz * dz));
    ++used;
  };
  auto record_growth = [&](const Point& a) { growth.emplace_back(norm_s(a.cg, s), norm_s(a.x, s)); };

  std::vector<Point> xs, ys;
  xs.reserve(n_pairs);
  ys.reserve(n_pairs);
  for (std::size_t k = 0; k < n_pairs; ++k) {
    xs.push_back(make_point(sample_prior(cov, rng)));
    ys.push_back(make_point(sample_prior(cov, rng)));
    visit(xs.back(), ys.back());
    record_growth(xs.back());
    record_growth(ys.back());
  }

  // Probes along the leading basis directions, at the origin and at a few
  // prior draws, scaled by the prior standard deviation of each mode.
  const Point origin = make_point(Field::zeros(repr, n));
  record_growth(origin);
  const std::vector<double> eig = cov.operator_eigenvalues();
  const std::size_t modes = std::min(opts.probe_modes, n);
  std::vector<const Point*> bases{&origin};
  for (std::size_t k = 0; k < std::min(opts.probe_bases, n_pairs); ++k) bases.push_back(&xs[k]);
  for (const Point* base : bases) {
    for (std::size_t j = 1; j <= modes; ++j) {
      const Field e = basis_function(repr, n, j);
      const Point probe = make_point(add_scaled(base->x, std::sqrt(eig[j - 1]), e));
      visit(*base, probe);
      record_growth(probe);
    }
  }
  if (used == 0) throw std::invalid_argument("audit_assumptions: all sampled pairs coincide");

  double Lprime = norm_s(origin.cg, s);
  for (const auto& [g, x] : growth) Lprime = std::max(Lprime, g - L * x);

  // Lipschitz constant of C D^2 Phi from central-difference Hessian products
  // along a prior-drawn unit direction.
  double M = 0.0;
  const std::size_t m_pairs = std::min<std::size_t>(n_pairs, 100);
  for (std::size_t k = 0; k < m_pairs; ++k) {
    Field u = sample_prior(cov, rng);
    const double un = norm_s(u, s);
    if (!(un > 0.0)) continue;
    for (double& c : u.data) c /= un;
    auto hess_u = [&](const Field& x) {
      const double eps = opts.fd_step * (1.0 + norm_s(x, s));
      Field out = difference(preconditioned_gradient(phi, cov, add_scaled(x, eps, u)),
                             preconditioned_gradient(phi, cov, add_scaled(x, -eps, u)));
      for (double& c : out.data) c /= 2.0 * eps;
      return out;
    };
    const double dz = norm_s(difference(xs[k].x, ys[k].x), s);
    if (!(dz > 0.0)) continue;
    M = std::max(M, norm_s(difference(hess_u(xs[k].x), hess_u(ys[k].x)), s) / dz);
  }

  AssumptionReport rep;
  rep.L_hat = L;
  rep.Lprime_hat = Lprime;
  rep.zeta_hat = zeta;
  rep.M_hat = M;
  rep.pairs_used = used;
  const double T = p.T();
  const double h = p.h();
  rep.step_condition = T * T + L * (T * T + 2.0 * h * T);
  rep.convex_step_threshold = zeta / (1.0 + L);
  rep.theorem_rate = 1.0 - zeta * T * T / 27.0;

  rep.lipschitz_ok = std::isfinite(L) && std::isfinite(Lprime);
  rep.convexity_ok = zeta > 0.0 && zeta <= L + 1.0;
  rep.derivative_bound_ok = std::isfinite(M);
  rep.step_condition_ok = rep.step_condition <= 1.0;
  rep.convex_step_condition_ok = rep.step_condition <= rep.convex_step_threshold;

  if (zeta > 0.0 && opts.r_draws > 0) {
    std::vector<double> norms;
    norms.reserve(opts.r_draws);
    for (std::size_t k = 0; k < opts.r_draws; ++k) norms.push_back(norm_s(sample_prior(cov, rng), s));
    rep.R_hat = stats::quantile(std::move(norms), 1.0 - zeta / (2000.0 * (L + 1.0)));
  } else {
    rep.R_hat = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

// ---------------------------------------------------------------------------

BoundAuditReport audit_trajectory_bounds(const Potential& phi, const CovarianceModel& cov, const IntegratorParams& p,
                                         std::size_t n_runs, Rng& rng, const BoundConstants& k, double sobolev_index,
                                         double gate_constant) {
  const double T = p.T();
  const double h = p.h();
  const double c = T * T + k.L * (T * T + 2.0 * h * T);
  if (c > 1.0) {
    throw std::invalid_argument("audit_trajectory_bounds: T^2 + L(T^2 + 2hT) = " + std::to_string(c) + " exceeds 1");
  }
  if (!(gate_constant > 0.0)) throw std::invalid_argument("audit_trajectory_bounds: gate_constant must be > 0");
  const double s = sobolev_index;
  constexpr double kSlack = 1e-10;

  BoundAuditReport rep;
  rep.runs = n_runs;
  auto check = [&](const char* name, std::size_t run, double lhs, double rhs) {
    if (!(lhs <= rhs * (1.0 + kSlack) + 1e-14)) rep.violations.push_back({name, run, lhs, rhs});
  };

  for (std::size_t run = 0; run < n_runs; ++run) {
    const Field x = sample_prior(cov, rng);
    const Field y = sample_prior(cov, rng);
    const Field v = sample_prior(cov, rng);
    const std::vector<PhaseState> tx = trajectory({x, v}, p, phi, cov);
    const std::vector<PhaseState> ty = trajectory({y, v}, p, phi, cov);

    const double scale = std::max(norm_s(x, s), norm_s(add_scaled(x, T, v), s));
    double dq = 0.0, dv = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
      const Field free = add_scaled(x, static_cast<double>(i) * h, v);
      dq = std::max(dq, norm_s(difference(tx[i].q, free), s));
      dv = std::max(dv, norm_s(difference(tx[i].v, v), s));
    }
    check("position_growth", run, dq, c * scale + k.L_prime * (T * T + 2.0 * T * h));
    check("velocity_growth", run, dv,
          (1.0 + k.L) * T * (1.0 + c) * scale + k.L_prime * ((1.0 + k.L) * (T * T * T + 2.0 * T * T * h) + T));

    const Field z0 = difference(x, y);
    const double nz0 = norm_s(z0, s);
    double dz = 0.0, dw = 0.0;
    for (std::size_t i = 0; i < tx.size(); ++i) {
      const Field zi = difference(tx[i].q, ty[i].q);
      dz = std::max(dz, norm_s(difference(zi, z0), s));
      dw = std::max(dw, norm_s(difference(tx[i].v, ty[i].v), s));
    }
    check("difference_position", run, dz, c * nz0);
    check("difference_velocity", run, dw, 2.0 * T * (1.0 + k.L) * nz0);

    const double nv = norm_s(v, s);
    const bool gate = c <= k.zeta / (1.0 + k.L) && (1.0 + norm_s(x, s) + nv) * h <= k.zeta / gate_constant &&
                      (1.0 + norm_s(y, s) + nv) * h <= k.zeta / gate_constant;
    if (!gate) {
      ++rep.contraction_out_of_scope;
      continue;
    }
    ++rep.contraction_checked;
    const double zT = norm_s(difference(tx.back().q, ty.back().q), s);
    check("contraction", run, zT * zT, (1.0 - k.zeta * T * T / 12.0) * nz0 * nz0);
  }
  return rep;
}

// ---------------------------------------------------------------------------

Field draw_initial(const InitialDistribution& dist, const CovarianceModel& cov, Rng& rng) {
  if (const auto* pm = std::get_if<PointMass>(&dist)) return pm->point;
  const Field& shift = std::get<ShiftedPrior>(dist).shift;
  const Field xi = to_representation(sample_prior(cov, rng), shift.repr);
  return add_scaled(shift, 1.0, xi);
}

bool WassersteinCurve::dominated_by(double rate, double rel_tol) const {
  if (mean_distance.empty()) return true;
  const double d0 = mean_distance.front();
  for (std::size_t n = 0; n < mean_distance.size(); ++n) {
    if (mean_distance[n] > std::pow(rate, static_cast<double>(n)) * d0 * (1.0 + rel_tol)) return false;
  }
  return true;
}

WassersteinCurve wasserstein_decay_experiment(const InitialDistribution& mu, const InitialDistribution& nu,
                                              std::size_t n_chains, std::size_t n_iters, std::uint64_t seed,
                                              const HmcConfig& cfg, const CouplingOptions& opts) {
  if (n_chains == 0) throw std::invalid_argument("wasserstein_decay_experiment: n_chains must be >= 1");
  validate(cfg);
  std::vector<std::vector<double>> paths(n_chains, std::vector<double>(n_iters + 1, 0.0));
  std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic)
  for (std::size_t k = 0; k < n_chains; ++k) {
    try {
      Rng rng(derive_seed(seed, k));
      const Field x = draw_initial(mu, *cfg.covariance, rng);
      const Field y = draw_initial(nu, *cfg.covariance, rng);
      const CouplingTrace trace = run_coupling(x, y, n_iters, rng, cfg, opts);
      for (const CouplingRecord& r : trace.records) paths[k][r.iter] = r.distance_l2;
      if (trace.coalescence_iter) paths[k][*trace.coalescence_iter] = 0.0;
    } catch (...) {
#pragma omp critical(phmc_wasserstein_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  WassersteinCurve curve;
  curve.mean_distance.assign(n_iters + 1, 0.0);
  for (const auto& path : paths) {
    for (std::size_t n = 0; n <= n_iters; ++n) curve.mean_distance[n] += path[n];
  }
  for (double& m : curve.mean_distance) m /= static_cast<double>(n_chains);
  return curve;
}

}  // namespace phmc
