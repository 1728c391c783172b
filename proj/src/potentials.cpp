#include "phmc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "phmc/errors.hpp"
#include "phmc/kernels.hpp"

namespace phmc {

std::optional<Field> Potential::constant_gradient(Representation, std::size_t) const { return std::nullopt; }

std::optional<KnownConstants> Potential::known_constants(const CovarianceModel&) const { return std::nullopt; }

Field preconditioned_gradient(const Potential& phi, const CovarianceModel& cov, const Field& q) {
  return apply_covariance(cov, phi.gradient(q));
}

namespace {

// Sine coefficients of the constant function 1 under the grid quadrature:
// w sqrt(2) sum_i sin(j i pi/(N+1)) = w sqrt(2) cot(j pi / (2(N+1))) for odd j, 0 for even j.
std::vector<double> unit_function_coefficients(std::size_t n) {
  std::vector<double> b(n, 0.0);
  const double w = grid_weight(n);
  for (std::size_t j = 1; j <= n; j += 2) {
    const double half_angle = static_cast<double>(j) * std::numbers::pi / (2.0 * static_cast<double>(n + 1));
    b[j - 1] = w * std::numbers::sqrt2 / std::tan(half_angle);
  }
  return b;
}

Field unit_function(Representation repr, std::size_t n) {
  if (repr == Representation::Grid) return Field(Representation::Grid, std::vector<double>(n, 1.0));
  return Field(Representation::Spectral, unit_function_coefficients(n));
}

class LinearPotential final : public Potential {
 public:
  std::string name() const override { return "linear"; }

  double evaluate(const Field& q) const override {
    if (q.repr == Representation::Grid) {
      double sum = 0.0;
      for (double x : q.data) sum += x;
      return grid_weight(q.size()) * sum;
    }
    return kernels::dot(unit_function_coefficients(q.size()), q.data);
  }

  Field gradient(const Field& q) const override { return unit_function(q.repr, q.size()); }

  std::optional<Field> constant_gradient(Representation repr, std::size_t n) const override {
    return unit_function(repr, n);
  }

  std::optional<KnownConstants> known_constants(const CovarianceModel& cov) const override {
    const Field b = unit_function(cov.native_representation(), cov.size());
    KnownConstants k;
    k.L = 0.0;
    k.L_prime = l2_norm(apply_covariance(cov, b));
    k.zeta = 1.0;
    return k;
  }
};

class QuarticNormPotential final : public Potential {
 public:
  std::string name() const override { return "quartic-norm"; }

  double evaluate(const Field& q) const override {
    const double d = l2_inner(q, q) - 1.0;
    return d * d;
  }

  Field gradient(const Field& q) const override {
    Field g = q;
    const double factor = 4.0 * (l2_inner(q, q) - 1.0);
    for (double& x : g.data) x *= factor;
    return g;
  }
};

class DoubleWellPotential final : public Potential {
 public:
  explicit DoubleWellPotential(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw std::invalid_argument("double-well potential: gamma must be positive");
    }
  }

  std::string name() const override { return "double-well"; }

  double evaluate(const Field& q) const override {
    const Field f = to_grid(q);
    return 0.5 * gamma_ * grid_weight(f.size()) * kernels::double_well_integrand_sum(f.data);
  }

  Field gradient(const Field& q) const override {
    const Field f = to_grid(q);
    Field g(Representation::Grid, std::vector<double>(f.size()));
    kernels::double_well_gradient(f.data, gamma_, g.data);
    return to_representation(g, q.repr);
  }

 private:
  double gamma_;
};

class ZeroPotential final : public Potential {
 public:
  std::string name() const override { return "zero"; }
  double evaluate(const Field&) const override { return 0.0; }
  Field gradient(const Field& q) const override { return Field::zeros(q.repr, q.size()); }
  std::optional<Field> constant_gradient(Representation repr, std::size_t n) const override {
    return Field::zeros(repr, n);
  }
  std::optional<KnownConstants> known_constants(const CovarianceModel&) const override {
    return KnownConstants{};
  }
};

class GaussianPotential final : public Potential {
 public:
  explicit GaussianPotential(std::vector<double> diagonal) : diagonal_(std::move(diagonal)) {
    if (diagonal_.empty()) throw std::invalid_argument("quadratic potential: empty diagonal");
    for (double a : diagonal_) {
      if (!(a >= 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("quadratic potential: diagonal entries must be finite and >= 0");
      }
    }
  }

  std::string name() const override { return "quadratic"; }

  double evaluate(const Field& q) const override { return 0.5 * l2_inner(q, gradient(q)); }

  Field gradient(const Field& q) const override {
    const auto a = expand(q.size());
    Field g = q;
    for (std::size_t i = 0; i < g.size(); ++i) g.data[i] *= a[i];
    return g;
  }

  std::optional<KnownConstants> known_constants(const CovarianceModel& cov) const override {
    if (!cov.is_spectral()) return std::nullopt;
    const auto a = expand(cov.size());
    const auto ev = cov.operator_eigenvalues();
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
      lo = std::min(lo, ev[j] * a[j]);
      hi = std::max(hi, ev[j] * a[j]);
    }
    KnownConstants k;
    k.L = hi;
    k.L_prime = 0.0;
    k.zeta = 1.0 + lo;
    return k;
  }

 private:
  std::vector<double> expand(std::size_t n) const {
    if (diagonal_.size() == 1) return std::vector<double>(n, diagonal_.front());
    if (diagonal_.size() != n) {
      throw DimensionMismatch("quadratic potential: diagonal has " + std::to_string(diagonal_.size()) +
                              " entries, field has " + std::to_string(n));
    }
    return diagonal_;
  }

  std::vector<double> diagonal_;
};

}  // namespace

PotentialPtr linear_potential() { return std::make_shared<LinearPotential>(); }
PotentialPtr quartic_norm_potential() { return std::make_shared<QuarticNormPotential>(); }
PotentialPtr double_well_potential(double gamma) { return std::make_shared<DoubleWellPotential>(gamma); }
PotentialPtr zero_potential() { return std::make_shared<ZeroPotential>(); }
PotentialPtr gaussian_potential(std::vector<double> diagonal) {
  return std::make_shared<GaussianPotential>(std::move(diagonal));
}

const std::vector<std::string>& potential_names() {
  static const std::vector<std::string> names{"linear", "quartic-norm", "double-well", "zero", "quadratic"};
  return names;
}

PotentialPtr make_potential(std::string_view name, const PotentialParams& params) {
  if (name == "linear") return linear_potential();
  if (name == "quartic-norm") return quartic_norm_potential();
  if (name == "double-well") return double_well_potential(params.gamma);
  if (name == "zero") return zero_potential();
  if (name == "quadratic") return gaussian_potential(params.quadratic_diagonal);
  throw std::invalid_argument("unknown potential '" + std::string(name) + "'");
}

}  // namespace phmc
