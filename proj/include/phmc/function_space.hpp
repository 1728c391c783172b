#pragma once

// Discretized function space on [0, 1]: fields in sine-coefficient or
// interior-grid form, Sobolev-like inner products, the Brownian-bridge
// prior covariance and Gaussian prior sampling.
//
// Conventions
//   grid points      x_i = i / (N + 1), i = 1..N
//   quadrature       <f, g>_grid = w * sum_i f_i g_i, w = 1 / (N + 1)
//   sine basis       phi_n(x) = sqrt(2) sin(n pi x), orthonormal under the
//                    grid quadrature as well as in L^2(0, 1)
//   spectral coeffs  <f, g>_spec = sum_n f_n g_n
//
// With these conventions to_spectral / to_grid are mutually inverse
// isometries, so L^2 quantities agree across representations.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "phmc/rng.hpp"

namespace phmc {

enum class Representation { Spectral, Grid };

std::string to_string(Representation repr);

struct Field {
  Representation repr = Representation::Spectral;
  std::vector<double> data;

  Field() = default;
  Field(Representation r, std::vector<double> values) : repr(r), data(std::move(values)) {}

  static Field zeros(Representation r, std::size_t n) { return Field(r, std::vector<double>(n, 0.0)); }
  static Field constant(Representation r, std::size_t n, double value);

  std::size_t size() const noexcept { return data.size(); }
  bool all_finite() const noexcept;

  friend bool operator==(const Field&, const Field&) = default;
};

// Throws DimensionMismatch unless a and b share dimension and representation.
void require_compatible(const Field& a, const Field& b, const char* context);

// Coefficient-space unit vector phi_j (1-based j) expressed in `repr`.
Field basis_function(Representation repr, std::size_t n, std::size_t j);

// Quadrature weight 1/(N+1) of the interior grid.
inline double grid_weight(std::size_t n) { return 1.0 / static_cast<double>(n + 1); }
inline double grid_point(std::size_t i, std::size_t n) {
  return static_cast<double>(i) / static_cast<double>(n + 1);
}

// ---------------------------------------------------------------------------
// Representation changes (fast sine transform; see sine_transform.hpp).
// Both are identities when the field is already in the target form.
Field to_spectral(const Field& f);
Field to_grid(const Field& f);
Field to_representation(const Field& f, Representation target);

// ---------------------------------------------------------------------------
// Inner products and norms.

// L^2(0,1) pairing in the field's own representation.
double l2_inner(const Field& f, const Field& g);
double l2_norm(const Field& f);
double l2_distance(const Field& f, const Field& g);

// <f, g>_s = sum_j j^{2s} f_j g_j on sine coefficients. Grid inputs are
// converted first.
double sobolev_inner(const Field& f, const Field& g, double s);
double sobolev_norm(const Field& f, double s);
double sobolev_distance(const Field& f, const Field& g, double s);

// ---------------------------------------------------------------------------
// Covariance of the Gaussian prior.

// Diagonal in the sine basis: C phi_j = lambda_j^2 phi_j.
struct SpectralCovariance {
  std::vector<double> lambdas;  // standard deviations, all > 0
};

// Brownian-bridge kernel min(s, t) - s t sampled on the interior grid.
struct BridgeGridCovariance {
  std::size_t n_points = 0;
};

class CovarianceModel {
 public:
  static CovarianceModel spectral(std::vector<double> lambdas);
  static CovarianceModel bridge_grid(std::size_t n_points);
  // Brownian bridge in its Karhunen-Loeve basis: lambda_j = 1 / (j pi).
  static CovarianceModel bridge_spectral(std::size_t n);

  std::size_t size() const noexcept;
  Representation native_representation() const noexcept;
  bool is_spectral() const noexcept { return std::holds_alternative<SpectralCovariance>(model_); }

  // Only valid for the spectral form.
  std::span<const double> lambdas() const;

  // Exact bridge kernel value at grid nodes i, j (1-based).
  static double bridge_kernel(std::size_t i, std::size_t j, std::size_t n);

  // Eigenvalues of C as an operator on its native representation, ascending j.
  // Spectral: lambda_j^2. Grid: discrete Dirichlet-Laplacian Green's function
  // eigenvalues h^2 / (4 sin^2(j pi h / 2)), h = 1/(N+1).
  std::vector<double> operator_eigenvalues() const;

  const std::variant<SpectralCovariance, BridgeGridCovariance>& model() const noexcept { return model_; }

 private:
  explicit CovarianceModel(std::variant<SpectralCovariance, BridgeGridCovariance> m) : model_(std::move(m)) {}
  std::variant<SpectralCovariance, BridgeGridCovariance> model_;
};

// Karhunen-Loeve standard deviations of the Brownian bridge, lambda_j = 1/(j pi).
std::vector<double> bridge_eigenvalues(int n);

// C w. Grid form solves the scaled Dirichlet second-difference system
// (the bridge kernel is its Green's function), which is exact for the
// quadrature-discretized kernel integral.
Field apply_covariance(const CovarianceModel& cov, const Field& w);

// <w, C w> = ||C^{1/2} w||^2 in the field's representation.
double covariance_quadratic_form(const CovarianceModel& cov, const Field& w);

// One draw from N(0, C) in the covariance's native representation.
Field sample_prior(const CovarianceModel& cov, Rng& rng);

}  // namespace phmc
