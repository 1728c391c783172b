#include "phmc/kernels.hpp"

#include <cassert>
#include <cmath>
#include <numbers>
#include <vector>

namespace phmc::kernels {
namespace {

// sin(m pi / (N+1)) for m in [0, 2(N+1)); the product index is reduced mod 2(N+1).
std::vector<double> sine_table(std::size_t n) {
  const std::size_t period = 2 * (n + 1);
  std::vector<double> table(period);
  for (std::size_t m = 0; m < period; ++m) {
    table[m] = std::sin(std::numbers::pi * static_cast<double>(m) / static_cast<double>(n + 1));
  }
  return table;
}

constexpr std::size_t kDenseThreshold = 256;

}  // namespace

void lincomb(std::span<double> out, double a, std::span<const double> x, double b, std::span<const double> y) {
  assert(out.size() == x.size() && x.size() == y.size());
  const std::size_t n = out.size();
  double* o = out.data();
  const double* px = x.data();
  const double* py = y.data();
#pragma omp parallel for simd schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) o[i] = a * px[i] + b * py[i];
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  assert(y.size() == x.size());
  const std::size_t n = y.size();
  double* py = y.data();
  const double* px = x.data();
#pragma omp parallel for simd schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) py[i] += a * px[i];
}

void double_well_gradient(std::span<const double> q, double gamma, std::span<double> out) {
  assert(q.size() == out.size());
  const std::size_t n = q.size();
  const double* pq = q.data();
  double* o = out.data();
#pragma omp parallel for simd schedule(static) if (n >= kParallelThreshold)
  for (std::size_t i = 0; i < n; ++i) o[i] = 2.0 * gamma * (pq[i] * pq[i] - 0.25) * pq[i];
}

double double_well_integrand_sum(std::span<const double> q) {
  double sum = 0.0;
  for (double x : q) {
    const double d = x * x - 0.25;
    sum += d * d;
  }
  return sum;
}

void dense_sine_transform(std::span<const double> in, std::span<double> out, double scale) {
  assert(in.size() == out.size());
  const std::size_t n = in.size();
  const std::size_t period = 2 * (n + 1);
  const std::vector<double> table = sine_table(n);
#pragma omp parallel for schedule(static) if (n >= kDenseThreshold)
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < n; ++i) {
      m += k + 1;
      if (m >= period) m -= period;
      acc += in[i] * table[m];
    }
    out[k] = scale * acc;
  }
}

void dense_bridge_apply(std::span<const double> in, std::span<double> out) {
  assert(in.size() == out.size());
  const std::size_t n = in.size();
  const double w = 1.0 / static_cast<double>(n + 1);
#pragma omp parallel for schedule(static) if (n >= kDenseThreshold)
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = static_cast<double>(i + 1) * w;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double xj = static_cast<double>(j + 1) * w;
      acc += (std::min(xi, xj) - xi * xj) * in[j];
    }
    out[i] = w * acc;
  }
}

void dirichlet_laplacian_solve(std::span<const double> rhs, double scale, std::span<double> out) {
  assert(rhs.size() == out.size());
  const std::size_t n = rhs.size();
  if (n == 0) return;
  // Forward sweep for tridiag(-1, 2, -1): pivots d_i = (i+2)/(i+1).
  std::vector<double> cprime(n);
  double pivot = 2.0;
  out[0] = scale * rhs[0] / pivot;
  cprime[0] = -1.0 / pivot;
  for (std::size_t i = 1; i < n; ++i) {
    pivot = 2.0 + cprime[i - 1];
    cprime[i] = -1.0 / pivot;
    out[i] = (scale * rhs[i] + out[i - 1]) / pivot;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    out[i] -= cprime[i] * out[i + 1];
  }
}

double dot(std::span<const double> x, std::span<const double> y) {
  assert(x.size() == y.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) sum += x[i] * y[i];
  return sum;
}

namespace serial {

void lincomb(std::span<double> out, double a, std::span<const double> x, double b, std::span<const double> y) {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a * x[i] + b * y[i];
}

void axpy(std::span<double> y, double a, std::span<const double> x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

void double_well_gradient(std::span<const double> q, double gamma, std::span<double> out) {
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = 2.0 * gamma * (q[i] * q[i] - 0.25) * q[i];
}

void dense_sine_transform(std::span<const double> in, std::span<double> out, double scale) {
  const std::size_t n = in.size();
  const double np1 = static_cast<double>(n + 1);
  for (std::size_t k = 0; k < n; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += in[i] * std::sin(std::numbers::pi * static_cast<double>((k + 1) * (i + 1)) / np1);
    }
    out[k] = scale * acc;
  }
}

void dense_bridge_apply(std::span<const double> in, std::span<double> out) {
  const std::size_t n = in.size();
  const double w = 1.0 / static_cast<double>(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double xi = static_cast<double>(i + 1) * w;
      const double xj = static_cast<double>(j + 1) * w;
      acc += (std::min(xi, xj) - xi * xj) * in[j];
    }
    out[i] = w * acc;
  }
}

}  // namespace serial
}  // namespace phmc::kernels
