#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phmc/function_space.hpp"

namespace phmc {

// Constants of the regularity/convexity conditions when they are known in
// closed form (l = 0):
//   L       Lipschitz constant of q -> C DPhi(q)
//   L_prime ||C DPhi(q)|| <= L ||q|| + L_prime
//   zeta    ||x-y||^2 + <C DPhi(x) - C DPhi(y), x-y> >= zeta ||x-y||^2
//   M       Lipschitz constant of q -> C D^2 Phi(q)
//   M4      bound on the fourth derivative
struct KnownConstants {
  double L = 0.0;
  double L_prime = 0.0;
  double zeta = 1.0;
  double M = 0.0;
  double M4 = 0.0;
};

// Potential Phi with its gradient. gradient() returns the Riesz
// representative of DPhi(q) with respect to l2_inner in the representation
// of q, so <gradient(q), v> is the directional derivative along v.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual std::string name() const = 0;
  virtual double evaluate(const Field& q) const = 0;
  virtual Field gradient(const Field& q) const = 0;

  // Set when DPhi is independent of q; enables the closed-form exact flow.
  virtual std::optional<Field> constant_gradient(Representation repr, std::size_t n) const;

  virtual std::optional<KnownConstants> known_constants(const CovarianceModel& cov) const;
};

using PotentialPtr = std::shared_ptr<const Potential>;

// Phi(q) = int_0^1 q(s) ds
PotentialPtr linear_potential();
// Phi(q) = (int_0^1 q(s)^2 ds - 1)^2
PotentialPtr quartic_norm_potential();
// Phi(q) = (gamma / 2) int_0^1 (q(s)^2 - 1/4)^2 ds, gamma > 0
PotentialPtr double_well_potential(double gamma);
PotentialPtr zero_potential();
// Phi(q) = 1/2 <q, A q> with A diagonal in the field's coordinates.
// A single entry is broadcast to every coordinate.
PotentialPtr gaussian_potential(std::vector<double> diagonal);

// C DPhi(q); the only route by which preconditioned gradients are formed.
Field preconditioned_gradient(const Potential& phi, const CovarianceModel& cov, const Field& q);

struct PotentialParams {
  double gamma = 20.0;
  std::vector<double> quadratic_diagonal{1.0};
};

// Registry: "linear", "quartic-norm", "double-well", "zero", "quadratic".
PotentialPtr make_potential(std::string_view name, const PotentialParams& params = {});
const std::vector<std::string>& potential_names();

}  // namespace phmc
