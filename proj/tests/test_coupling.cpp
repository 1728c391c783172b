#include <cmath>
#include <memory>
#include <numbers>

#include "doctest.h"
#include "oracles.hpp"
#include "phmc/coupling.hpp"
#include "phmc/errors.hpp"

using namespace phmc;

namespace {

HmcConfig make_cfg(PotentialPtr phi, CovarianceModel cov, double h = 0.2, std::size_t steps = 12,
                   HmcMode mode = HmcMode::Adjusted) {
  HmcConfig cfg;
  cfg.integrator = IntegratorParams(h, steps);
  cfg.mode = mode;
  cfg.potential = std::move(phi);
  cfg.covariance = std::make_shared<const CovarianceModel>(std::move(cov));
  return cfg;
}

CouplingTrace synthetic_trace(double rate, double d0, std::size_t n) {
  CouplingTrace t;
  for (std::size_t k = 0; k <= n; ++k) {
    CouplingRecord r;
    r.iter = k;
    r.distance_l2 = d0 * std::pow(rate, static_cast<double>(k));
    t.records.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("coalescence test") {
  const Field a(Representation::Spectral, {1.0, 2.0});
  Field b = a;
  CHECK(states_coalesced(a, b));
  b.data[1] = std::nextafter(2.0, 3.0);
  CHECK_FALSE(states_coalesced(a, b));
  CHECK(states_coalesced(a, b, 1e-12));
}

TEST_CASE("identical starts coalesce at iteration 0 and stay together") {
  Rng rng(51);
  const HmcConfig cfg = make_cfg(double_well_potential(20.0), CovarianceModel::bridge_spectral(32));
  const Field x = sample_prior(*cfg.covariance, rng);
  const CouplingTrace t = run_coupling(x, x, 10, rng, cfg);
  REQUIRE(t.coalesced());
  CHECK(*t.coalescence_iter == 0);
  CHECK(t.records.size() == 1);
  const CoupledStepResult r = coupled_step({x, x}, rng, cfg);
  CHECK(r.state.x == r.state.y);
}

TEST_CASE("linear exact coupling contracts by |cos T| per iteration") {
  Rng rng(52);
  const HmcConfig cfg = make_cfg(linear_potential(), CovarianceModel::bridge_spectral(200), 0.2, 12, HmcMode::Exact);
  const Field x = sample_prior(*cfg.covariance, rng);
  const Field y = sample_prior(*cfg.covariance, rng);
  const CouplingTrace t = run_coupling(x, y, 30, rng, cfg);
  REQUIRE(t.records.size() == 31);
  CHECK(t.records[0].distance_l2 == doctest::Approx(l2_distance(x, y)));
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    CHECK(t.records[k].distance_l2 / t.records[k - 1].distance_l2 == doctest::Approx(std::abs(std::cos(2.4))).epsilon(1e-8));
  }
  CHECK(estimate_contraction_rate(t) == doctest::Approx(std::abs(std::cos(2.4))).epsilon(1e-8));
}

TEST_CASE("zero potential in adjusted mode behaves like the exact rotation") {
  Rng rng(53);
  const HmcConfig cfg = make_cfg(zero_potential(), CovarianceModel::bridge_grid(50), 0.25, 4);
  const Field x = sample_prior(*cfg.covariance, rng);
  const Field y = sample_prior(*cfg.covariance, rng);
  const CouplingTrace t = run_coupling(x, y, 15, rng, cfg);
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    CHECK(t.records[k].accepted_x);
    CHECK(t.records[k].accepted_y);
    CHECK(t.records[k].distance_l2 / t.records[k - 1].distance_l2 == doctest::Approx(std::abs(std::cos(1.0))).epsilon(1e-9));
  }
}

TEST_CASE("coupling is symmetric in the two chains") {
  const HmcConfig cfg = make_cfg(quartic_norm_potential(), CovarianceModel::bridge_spectral(64));
  Rng seed_rng(54);
  const Field x = sample_prior(*cfg.covariance, seed_rng);
  const Field y = sample_prior(*cfg.covariance, seed_rng);
  Rng r1(9), r2(9);
  const CouplingTrace a = run_coupling(x, y, 40, r1, cfg);
  const CouplingTrace b = run_coupling(y, x, 40, r2, cfg);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].distance_l2 == b.records[k].distance_l2);
    CHECK(a.records[k].accepted_x == b.records[k].accepted_y);
  }
}

TEST_CASE("linear adjusted coupling rotates the difference when both chains accept") {
  // a constant force cancels in x - y, so the difference sees only the rotation
  Rng rng(55);
  const HmcConfig cfg = make_cfg(linear_potential(), CovarianceModel::bridge_spectral(64), 0.4, 6);
  const CouplingTrace t =
      run_coupling(sample_prior(*cfg.covariance, rng), sample_prior(*cfg.covariance, rng), 60, rng, cfg);
  std::size_t both = 0;
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    const auto& r = t.records[k];
    const double ratio = r.distance_l2 / t.records[k - 1].distance_l2;
    if (r.accepted_x && r.accepted_y) {
      ++both;
      CHECK(ratio == doctest::Approx(std::abs(std::cos(2.4))).epsilon(1e-8));
    } else if (!r.accepted_x && !r.accepted_y) {
      CHECK(ratio == 1.0);
    }
  }
  CHECK(both > 0);
}

TEST_CASE("Sobolev distances in the trace") {
  Rng rng(56);
  const HmcConfig cfg = make_cfg(linear_potential(), CovarianceModel::bridge_spectral(40), 0.2, 12, HmcMode::Exact);
  const Field x = sample_prior(*cfg.covariance, rng);
  const Field y = sample_prior(*cfg.covariance, rng);
  CouplingOptions opts;
  opts.sobolev_index = 0.5;
  const CouplingTrace t = run_coupling(x, y, 5, rng, cfg, opts);
  CHECK(t.sobolev_index == 0.5);
  CHECK(t.records[0].distance_s == doctest::Approx(sobolev_distance(x, y, 0.5)));
}

TEST_CASE("coupling errors carry the iteration") {
  HmcConfig cfg = make_cfg(double_well_potential(1e6), CovarianceModel::bridge_grid(8), 0.1, 5, HmcMode::Exact);
  cfg.exact_surrogate = true;
  Rng rng(57);
  const Field big = Field::constant(Representation::Grid, 8, 1e40);
  try {
    (void)run_coupling(big, Field::zeros(Representation::Grid, 8), 5, rng, cfg);
    FAIL("expected ChainError");
  } catch (const ChainError& e) {
    CHECK(e.iteration() == 1);
    CHECK(e.is_divergence());
  }
}

TEST_CASE("contraction rate fit") {
  CHECK(estimate_contraction_rate(synthetic_trace(0.9, 1.0, 50)) == doctest::Approx(0.9).epsilon(1e-10));
  // invariant under rescaling the distances
  CHECK(estimate_contraction_rate(synthetic_trace(0.9, 1e-3, 50)) == doctest::Approx(0.9).epsilon(1e-10));
  CHECK_THROWS_AS(estimate_contraction_rate(synthetic_trace(0.9, 1.0, 8)), std::invalid_argument);
  // rounding-regime records are dropped
  CouplingTrace t = synthetic_trace(0.5, 1.0, 60);
  for (std::size_t k = 45; k <= 60; ++k) t.records[k].distance_l2 = 1e-16;
  CHECK(estimate_contraction_rate(t) == doctest::Approx(0.5).epsilon(1e-10));
  FitWindow w;
  w.first_iter = 5;
  w.last_iter = 20;
  const auto fit = fit_log_distance(synthetic_trace(0.8, 2.0, 40), w);
  CHECK(fit.r_squared == doctest::Approx(1.0));
  // records from coalescence on are excluded
  CouplingTrace c = synthetic_trace(0.7, 1.0, 20);
  c.records.back().distance_l2 = 0.0;
  c.coalescence_iter = 20;
  CHECK(estimate_contraction_rate(c) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("short trajectories contract at rate 1 - T^2/27") {
  Rng rng(58);
  const double T = 0.5;
  const HmcConfig cfg = make_cfg(linear_potential(), CovarianceModel::bridge_spectral(100), 0.05, 10, HmcMode::Exact);
  const CouplingTrace t =
      run_coupling(sample_prior(*cfg.covariance, rng), sample_prior(*cfg.covariance, rng), 100, rng, cfg);
  CHECK(estimate_contraction_rate(t) <= 1 - T * T / 27);
  // cos^2 t <= 1 - t^2 / 12 on (0, 1]
  for (int i = 1; i <= 1000; ++i) {
    const double s = i / 1000.0;
    CHECK(std::cos(s) * std::cos(s) <= 1 - s * s / 12);
  }
}

TEST_CASE("assumption audit: linear potential") {
  Rng rng(59);
  const auto cov = CovarianceModel::bridge_spectral(64);
  const AssumptionReport r = audit_assumptions(*linear_potential(), cov, IntegratorParams(0.05, 10), 200, rng);
  CHECK(r.L_hat == doctest::Approx(0.0).scale(1e-12));
  CHECK(r.zeta_hat == doctest::Approx(1.0).epsilon(1e-12));
  const double cb = l2_norm(preconditioned_gradient(*linear_potential(), cov, Field::zeros(Representation::Spectral, 64)));
  CHECK(r.Lprime_hat == doctest::Approx(cb).epsilon(1e-9));
  CHECK(r.M_hat < 1e-6);
  CHECK(r.lipschitz_ok);
  CHECK(r.convexity_ok);
  CHECK(r.step_condition_ok);
  CHECK(r.convex_step_condition_ok);
  CHECK(r.step_condition == doctest::Approx(0.25));
  CHECK(r.theorem_rate == doctest::Approx(1 - 0.25 / 27));
  CHECK(std::isfinite(r.R_hat));
  CHECK_THROWS_AS(audit_assumptions(*linear_potential(), cov, IntegratorParams(0.05, 10), 99, rng), std::invalid_argument);
}

TEST_CASE("assumption audit: quadratic reproduces the analytic constants") {
  Rng rng(60);
  const std::size_t n = 16;
  const auto cov = CovarianceModel::bridge_spectral(n);
  std::vector<double> diag(n);
  for (std::size_t j = 0; j < n; ++j) diag[j] = 1.0 + static_cast<double>(j + 1);
  const PotentialPtr phi = gaussian_potential(diag);
  AuditOptions opts;
  opts.r_draws = 2000;
  const AssumptionReport r = audit_assumptions(*phi, cov, IntegratorParams(0.05, 10), 300, rng, opts);
  const KnownConstants k = *phi->known_constants(cov);
  CHECK(r.L_hat == doctest::Approx(k.L).epsilon(0.05));
  CHECK(r.zeta_hat == doctest::Approx(k.zeta).epsilon(0.05));
  CHECK(r.M_hat < 1e-3);
}

TEST_CASE("assumption audit: steep double well is not convex") {
  Rng rng(61);
  AuditOptions opts;
  opts.r_draws = 1000;
  const AssumptionReport r =
      audit_assumptions(*double_well_potential(60.0), CovarianceModel::bridge_spectral(64), IntegratorParams(0.2, 12), 100,
                        rng, opts);
  CHECK(r.zeta_hat < 0.0);
  CHECK_FALSE(r.convexity_ok);
  CHECK(std::isnan(r.R_hat));
}

TEST_CASE("trajectory bound audit") {
  Rng rng(62);
  const std::size_t n = 32;
  const auto cov = CovarianceModel::bridge_spectral(n);
  const IntegratorParams p(0.05, 10);
  const BoundConstants lin{0.0, l2_norm(preconditioned_gradient(*linear_potential(), cov, Field::zeros(Representation::Spectral, n))), 1.0};
  const BoundAuditReport a = audit_trajectory_bounds(*linear_potential(), cov, p, 100, rng, lin);
  CHECK(a.passed());
  CHECK(a.runs == 100);
  CHECK(a.contraction_checked > 0);

  const BoundAuditReport z = audit_trajectory_bounds(*zero_potential(), cov, p, 50, rng, BoundConstants{});
  CHECK(z.passed());

  // a wrong (too small) constant gets caught
  const PotentialPtr steep = gaussian_potential({50.0});
  const KnownConstants k = *steep->known_constants(cov);
  const BoundConstants wrong{0.0, 0.0, k.zeta};
  const BoundAuditReport w = audit_trajectory_bounds(*steep, cov, p, 50, rng, wrong);
  CHECK_FALSE(w.passed());

  CHECK_THROWS_AS(audit_trajectory_bounds(*linear_potential(), cov, IntegratorParams(0.2, 12), 10, rng, lin),
                  std::invalid_argument);
}

TEST_CASE("Wasserstein decay") {
  const std::size_t n = 64;
  const HmcConfig cfg = make_cfg(linear_potential(), CovarianceModel::bridge_spectral(n), 0.2, 12, HmcMode::Exact);
  Rng rng(63);
  const Field a = sample_prior(*cfg.covariance, rng);
  const Field b = sample_prior(*cfg.covariance, rng);

  const WassersteinCurve same = wasserstein_decay_experiment(PointMass{a}, PointMass{a}, 4, 10, 1, cfg);
  for (double d : same.mean_distance) CHECK(d == 0.0);

  const WassersteinCurve pm = wasserstein_decay_experiment(PointMass{a}, PointMass{b}, 4, 20, 2, cfg);
  REQUIRE(pm.mean_distance.size() == 21);
  const double c = std::abs(std::cos(2.4));
  for (std::size_t k = 0; k < pm.mean_distance.size(); ++k) {
    CHECK(pm.mean_distance[k] == doctest::Approx(l2_distance(a, b) * std::pow(c, static_cast<double>(k))).epsilon(1e-8));
  }
  CHECK(pm.dominated_by(c, 1e-8));
  CHECK_FALSE(pm.dominated_by(0.5 * c));

  const HmcConfig short_cfg = make_cfg(linear_potential(), CovarianceModel::bridge_spectral(n), 0.05, 10, HmcMode::Exact);
  const WassersteinCurve sp = wasserstein_decay_experiment(ShiftedPrior{a}, ShiftedPrior{b}, 16, 40, 3, short_cfg);
  CHECK(sp.dominated_by(1 - 0.25 / 27));

  // same seed, same curve
  const WassersteinCurve again = wasserstein_decay_experiment(ShiftedPrior{a}, ShiftedPrior{b}, 16, 40, 3, short_cfg);
  CHECK(again.mean_distance == sp.mean_distance);
}

TEST_CASE("initial distributions") {
  Rng rng(64);
  const auto cov = CovarianceModel::bridge_spectral(8);
  const Field shift = Field::constant(Representation::Spectral, 8, 0.5);
  CHECK(draw_initial(PointMass{shift}, cov, rng) == shift);
  const Field d = draw_initial(ShiftedPrior{shift}, cov, rng);
  CHECK(d.size() == 8);
  CHECK_FALSE(d == shift);
}
