#pragma once

// Data-parallel inner loops over field coefficients.
//
// phmc::kernels holds the OpenMP versions used by the library; every one has
// a plain loop twin in phmc::kernels::serial kept as the test reference and
// benchmark baseline. Only element-wise maps and row-parallel dense products
// are parallelized. Reductions stay serial so results do not depend on the
// thread count.

#include <cstddef>
#include <span>

namespace phmc::kernels {

// Below this length the OpenMP region is skipped for O(N) loops.
inline constexpr std::size_t kParallelThreshold = 1u << 14;

// out = a * x + b * y
void lincomb(std::span<double> out, double a, std::span<const double> x, double b, std::span<const double> y);
// y += a * x
void axpy(std::span<double> y, double a, std::span<const double> x);
// out_i = 2 gamma (q_i^2 - 1/4) q_i
void double_well_gradient(std::span<const double> q, double gamma, std::span<double> out);
// sum_i (q_i^2 - 1/4)^2, serial reduction
double double_well_integrand_sum(std::span<const double> q);

// out_k = scale * sum_i in_i sin((k+1)(i+1) pi / (N+1)), O(N^2), parallel over k.
void dense_sine_transform(std::span<const double> in, std::span<double> out, double scale);
// out_i = w * sum_j (min(x_i, x_j) - x_i x_j) in_j, O(N^2), parallel over i.
void dense_bridge_apply(std::span<const double> in, std::span<double> out);

// Solves tridiag(-1, 2, -1) out = scale * rhs (Dirichlet second difference), O(N).
// Thomas recursion; inherently sequential.
void dirichlet_laplacian_solve(std::span<const double> rhs, double scale, std::span<double> out);

// Serial reduction shared by both namespaces.
double dot(std::span<const double> x, std::span<const double> y);

namespace serial {
void lincomb(std::span<double> out, double a, std::span<const double> x, double b, std::span<const double> y);
void axpy(std::span<double> y, double a, std::span<const double> x);
void double_well_gradient(std::span<const double> q, double gamma, std::span<double> out);
void dense_sine_transform(std::span<const double> in, std::span<double> out, double scale);
void dense_bridge_apply(std::span<const double> in, std::span<double> out);
}  // namespace serial

}  // namespace phmc::kernels
