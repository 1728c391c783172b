#include "phmc/function_space.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "phmc/errors.hpp"
#include "phmc/kernels.hpp"
#include "phmc/sine_transform.hpp"

namespace phmc {

std::string to_string(Representation repr) {
  return repr == Representation::Spectral ? "spectral" : "grid";
}

Field Field::constant(Representation r, std::size_t n, double value) {
  Field grid(Representation::Grid, std::vector<double>(n, value));
  return to_representation(grid, r);
}

bool Field::all_finite() const noexcept {
  return std::all_of(data.begin(), data.end(), [](double x) { return std::isfinite(x); });
}

void require_compatible(const Field& a, const Field& b, const char* context) {
  if (a.size() != b.size()) {
    throw DimensionMismatch(std::string(context) + ": dimension " + std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  if (a.repr != b.repr) {
    throw DimensionMismatch(std::string(context) + ": representation " + to_string(a.repr) + " vs " +
                            to_string(b.repr));
  }
}

Field basis_function(Representation repr, std::size_t n, std::size_t j) {
  if (j < 1 || j > n) throw std::out_of_range("basis_function: index outside 1..N");
  Field e = Field::zeros(Representation::Spectral, n);
  e.data[j - 1] = 1.0;
  return to_representation(e, repr);
}

Field to_spectral(const Field& f) {
  if (f.repr == Representation::Spectral) return f;
  return Field(Representation::Spectral, sine_forward(f.data));
}

Field to_grid(const Field& f) {
  if (f.repr == Representation::Grid) return f;
  return Field(Representation::Grid, sine_inverse(f.data));
}

Field to_representation(const Field& f, Representation target) {
  return target == Representation::Spectral ? to_spectral(f) : to_grid(f);
}

double l2_inner(const Field& f, const Field& g) {
  require_compatible(f, g, "l2_inner");
  const double d = kernels::dot(f.data, g.data);
  return f.repr == Representation::Grid ? grid_weight(f.size()) * d : d;
}

double l2_norm(const Field& f) { return std::sqrt(l2_inner(f, f)); }

double l2_distance(const Field& f, const Field& g) {
  require_compatible(f, g, "l2_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = f.data[i] - g.data[i];
    sum += d * d;
  }
  if (f.repr == Representation::Grid) sum *= grid_weight(f.size());
  return std::sqrt(sum);
}

double sobolev_inner(const Field& f, const Field& g, double s) {
  if (f.size() != g.size()) {
    throw DimensionMismatch("sobolev_inner: dimension " + std::to_string(f.size()) + " vs " +
                            std::to_string(g.size()));
  }
  if (s == 0.0 && f.repr == g.repr) return l2_inner(f, g);
  const Field fs = to_spectral(f);
  const Field gs = to_spectral(g);
  double sum = 0.0;
  for (std::size_t j = 0; j < fs.size(); ++j) {
    sum += std::pow(static_cast<double>(j + 1), 2.0 * s) * fs.data[j] * gs.data[j];
  }
  return sum;
}

double sobolev_norm(const Field& f, double s) { return std::sqrt(std::max(0.0, sobolev_inner(f, f, s))); }

double sobolev_distance(const Field& f, const Field& g, double s) {
  if (s == 0.0) return l2_distance(f, g);
  require_compatible(f, g, "sobolev_distance");
  Field diff = f;
  kernels::axpy(diff.data, -1.0, g.data);
  return sobolev_norm(diff, s);
}

// ---------------------------------------------------------------------------

CovarianceModel CovarianceModel::spectral(std::vector<double> lambdas) {
  if (lambdas.empty()) throw std::invalid_argument("spectral covariance: no eigenvalues");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw std::invalid_argument("spectral covariance: standard deviations must be positive and finite");
    }
  }
  return CovarianceModel(SpectralCovariance{std::move(lambdas)});
}

CovarianceModel CovarianceModel::bridge_grid(std::size_t n_points) {
  if (n_points == 0) throw std::invalid_argument("bridge grid covariance: need at least one point");
  return CovarianceModel(BridgeGridCovariance{n_points});
}

CovarianceModel CovarianceModel::bridge_spectral(std::size_t n) {
  return spectral(bridge_eigenvalues(static_cast<int>(n)));
}

std::size_t CovarianceModel::size() const noexcept {
  if (const auto* s = std::get_if<SpectralCovariance>(&model_)) return s->lambdas.size();
  return std::get<BridgeGridCovariance>(model_).n_points;
}

Representation CovarianceModel::native_representation() const noexcept {
  return is_spectral() ? Representation::Spectral : Representation::Grid;
}

std::span<const double> CovarianceModel::lambdas() const {
  if (const auto* s = std::get_if<SpectralCovariance>(&model_)) return s->lambdas;
  throw std::logic_error("lambdas() on a grid covariance");
}

double CovarianceModel::bridge_kernel(std::size_t i, std::size_t j, std::size_t n) {
  const double xi = grid_point(i, n);
  const double xj = grid_point(j, n);
  return std::min(xi, xj) - xi * xj;
}

std::vector<double> CovarianceModel::operator_eigenvalues() const {
  const std::size_t n = size();
  std::vector<double> ev(n);
  if (const auto* s = std::get_if<SpectralCovariance>(&model_)) {
    for (std::size_t j = 0; j < n; ++j) ev[j] = s->lambdas[j] * s->lambdas[j];
    return ev;
  }
  const double h = grid_weight(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double sn = std::sin(static_cast<double>(j + 1) * std::numbers::pi * h / 2.0);
    ev[j] = h * h / (4.0 * sn * sn);
  }
  return ev;
}

std::vector<double> bridge_eigenvalues(int n) {
  if (n <= 0) throw std::invalid_argument("bridge_eigenvalues: N must be positive");
  std::vector<double> lambdas(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) lambdas[static_cast<std::size_t>(j - 1)] = 1.0 / (j * std::numbers::pi);
  return lambdas;
}

namespace {

Field apply_native(const CovarianceModel& cov, const Field& w) {
  Field out(w.repr, std::vector<double>(w.size()));
  if (cov.is_spectral()) {
    const auto lam = cov.lambdas();
    for (std::size_t j = 0; j < w.size(); ++j) out.data[j] = lam[j] * lam[j] * w.data[j];
  } else {
    // C = h^2 tridiag(-1, 2, -1)^{-1} exactly, h = 1/(N+1).
    const double h = grid_weight(w.size());
    kernels::dirichlet_laplacian_solve(w.data, h * h, out.data);
  }
  return out;
}

}  // namespace

Field apply_covariance(const CovarianceModel& cov, const Field& w) {
  if (w.size() != cov.size()) {
    throw DimensionMismatch("apply_covariance: field dimension " + std::to_string(w.size()) +
                            " vs covariance dimension " + std::to_string(cov.size()));
  }
  const Representation native = cov.native_representation();
  if (w.repr == native) return apply_native(cov, w);
  return to_representation(apply_native(cov, to_representation(w, native)), w.repr);
}

double covariance_quadratic_form(const CovarianceModel& cov, const Field& w) {
  return l2_inner(w, apply_covariance(cov, w));
}

Field sample_prior(const CovarianceModel& cov, Rng& rng) {
  const std::size_t n = cov.size();
  std::normal_distribution<double> normal(0.0, 1.0);
  if (cov.is_spectral()) {
    const auto lam = cov.lambdas();
    Field q(Representation::Spectral, std::vector<double>(n));
    for (std::size_t j = 0; j < n; ++j) q.data[j] = lam[j] * normal(rng);
    return q;
  }
  // Sequential bridge construction pinned at B(0) = B(1) = 0.
  Field q(Representation::Grid, std::vector<double>(n));
  const double h = grid_weight(n);
  double prev = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const double ratio = static_cast<double>(n + 1 - i) / static_cast<double>(n + 2 - i);
    prev = prev * ratio + std::sqrt(h * ratio) * normal(rng);
    q.data[i - 1] = prev;
  }
  return q;
}

}  // namespace phmc
