#pragma once

// Synchronous coupling of two pHMC chains: both chains consume the same
// velocity draw and the same acceptance uniform at every iteration. Also the
// empirical audits of the regularity/convexity constants and of the
// trajectory growth and contraction bounds.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "phmc/function_space.hpp"
#include "phmc/integrator.hpp"
#include "phmc/potentials.hpp"
#include "phmc/rng.hpp"
#include "phmc/sampler.hpp"
#include "phmc/stats.hpp"

namespace phmc {

struct CoupledState {
  Field x;
  Field y;
};

struct CouplingRecord {
  std::size_t iter = 0;
  double distance_l2 = 0.0;
  double distance_s = 0.0;  // in the trace's extra Sobolev index
  bool accepted_x = true;
  bool accepted_y = true;
  double delta_h_x = 0.0;
  double delta_h_y = 0.0;
};

struct CouplingOptions {
  double sobolev_index = 0.0;
  // 0 means bitwise equality of the two state vectors.
  double coalescence_eps = 0.0;
};

struct CouplingTrace {
  std::vector<CouplingRecord> records;  // records[0] is the initial pair
  std::optional<std::size_t> coalescence_iter;
  double sobolev_index = 0.0;

  bool coalesced() const noexcept { return coalescence_iter.has_value(); }
};

bool states_coalesced(const Field& x, const Field& y, double eps = 0.0);

struct CoupledStepResult {
  CoupledState state;
  CouplingRecord record;
};

// Draws one v ~ N(0, C) and one u ~ U(0, 1) and advances both chains with them.
CoupledStepResult coupled_step(const CoupledState& s, Rng& rng, const HmcConfig& cfg, std::size_t iter = 1,
                               const CouplingOptions& opts = {});

// Stops at the first coalescence. Errors are rethrown as ChainError with the iteration.
CouplingTrace run_coupling(const Field& x0, const Field& y0, std::size_t n_iters, Rng& rng, const HmcConfig& cfg,
                           const CouplingOptions& opts = {});

// Records used for the log-distance fit: iterations in [first_iter, last_iter],
// strictly before coalescence, with distance >= relative_floor * initial distance.
struct FitWindow {
  std::size_t first_iter = 0;
  std::size_t last_iter = std::numeric_limits<std::size_t>::max();
  double relative_floor = 1e-12;
};

stats::LinearFit fit_log_distance(const CouplingTrace& trace, const FitWindow& window = {});

// exp(slope of log distance_l2 vs iteration). Throws std::invalid_argument
// with fewer than 10 usable records.
double estimate_contraction_rate(const CouplingTrace& trace, const FitWindow& window = {});

// ---------------------------------------------------------------------------
// Assumption audit.

struct AuditOptions {
  double sobolev_index = 0.0;      // the index l of the norms
  std::size_t probe_modes = 32;    // basis directions probed around each probe base
  std::size_t probe_bases = 4;     // prior draws used as probe bases, besides the origin
  std::size_t r_draws = 100000;    // prior draws for the velocity-radius quantile
  double fd_step = 1e-4;           // relative central-difference step for Hessian products
};

// Estimated constants are one-sided: L_hat, Lprime_hat and M_hat are sups
// over the sampled pairs (lower bounds for the true constants) and zeta_hat
// is an inf (an upper bound for the true zeta).
struct AssumptionReport {
  double L_hat = 0.0;
  double Lprime_hat = 0.0;
  double zeta_hat = 1.0;
  double M_hat = 0.0;
  double R_hat = 0.0;                 // quantile of ||v||_l at 1 - zeta/(2000 (L+1)); NaN if zeta <= 0
  double step_condition = 0.0;        // T^2 + L (T^2 + 2 h T)
  double convex_step_threshold = 0.0; // zeta / (1 + L)
  double theorem_rate = 1.0;          // 1 - zeta T^2 / 27
  std::size_t pairs_used = 0;

  bool lipschitz_ok = false;            // L_hat, Lprime_hat finite
  bool convexity_ok = false;            // 0 < zeta_hat <= L_hat + 1
  bool derivative_bound_ok = false;     // M_hat finite
  bool step_condition_ok = false;       // step_condition <= 1
  bool convex_step_condition_ok = false;// step_condition <= zeta_hat / (1 + L_hat)
};

// Throws std::invalid_argument if n_pairs < 100 or every pair is degenerate.
AssumptionReport audit_assumptions(const Potential& phi, const CovarianceModel& cov, const IntegratorParams& p,
                                   std::size_t n_pairs, Rng& rng, const AuditOptions& opts = {});

// ---------------------------------------------------------------------------
// Trajectory bound audit.

struct BoundConstants {
  double L = 0.0;
  double L_prime = 0.0;
  double zeta = 1.0;
};

struct BoundViolation {
  std::string bound;
  std::size_t run = 0;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct BoundAuditReport {
  std::size_t runs = 0;
  std::size_t contraction_checked = 0;
  std::size_t contraction_out_of_scope = 0;
  std::vector<BoundViolation> violations;

  bool passed() const noexcept { return violations.empty(); }
};

// Checks on n_runs random starts:
//   position growth  max_i |q_i - (q_0 + i h v_0)| <= c max(|q_0|, |q_0 + T v_0|) + L'(T^2 + 2 T h)
//   velocity growth  max_i |v_i - v_0| <= (1+L) T (1 + c) max(...) + L'((1+L)(T^3 + 2 T^2 h) + T)
//   same-velocity    max_i |z_i - z_0| <= c |z_0|,  max_i |w_i| <= 2 T (1 + L) |z_0|
//   contraction      |z_I|^2 <= (1 - zeta T^2 / 12) |z_0|^2
// with c = T^2 + L (T^2 + 2 h T), z = q(x) - q(y), w = v(x) - v(y) under a shared velocity.
// The contraction check only runs where c <= zeta / (1 + L) and
// (1 + |x| + |v|) h <= zeta / gate_constant; other runs count as out of scope.
// Throws std::invalid_argument if c > 1.
BoundAuditReport audit_trajectory_bounds(const Potential& phi, const CovarianceModel& cov, const IntegratorParams& p,
                                         std::size_t n_runs, Rng& rng, const BoundConstants& constants,
                                         double sobolev_index = 0.0, double gate_constant = 1.0);

// ---------------------------------------------------------------------------
// Wasserstein decay.

struct PointMass {
  Field point;
};
// x = shift + xi with xi ~ N(0, C).
struct ShiftedPrior {
  Field shift;
};
using InitialDistribution = std::variant<PointMass, ShiftedPrior>;

Field draw_initial(const InitialDistribution& dist, const CovarianceModel& cov, Rng& rng);

struct WassersteinCurve {
  std::vector<double> mean_distance;  // index n = iteration n, n = 0..n_iters

  // mean_distance[n] <= rate^n mean_distance[0] (1 + rel_tol) for every n.
  bool dominated_by(double rate, double rel_tol = 1e-9) const;
};

// Mean coupled L2 distance over n_chains independent couplings; an upper
// bound on W1(mu P^n, nu P^n). Chains run in parallel with seeds derived from
// `seed`; coalesced chains contribute zero afterwards.
WassersteinCurve wasserstein_decay_experiment(const InitialDistribution& mu, const InitialDistribution& nu,
                                              std::size_t n_chains, std::size_t n_iters, std::uint64_t seed,
                                              const HmcConfig& cfg, const CouplingOptions& opts = {});

}  // namespace phmc
