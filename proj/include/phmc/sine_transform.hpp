#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace phmc {

// Orthonormal discrete sine transform between interior-grid values and
// coefficients of sqrt(2) sin(n pi x):
//
//   forward  c_n = w sqrt(2) sum_i f_i sin(n i pi / (N+1))
//   inverse  f_i =   sqrt(2) sum_n c_n sin(n i pi / (N+1))
//
// Backed by FFTW's RODFT00 (DST-I). Plans are cached per size; execution is
// thread-safe.
void sine_forward(std::span<const double> grid, std::span<double> coeffs);
void sine_inverse(std::span<const double> coeffs, std::span<double> grid);

std::vector<double> sine_forward(std::span<const double> grid);
std::vector<double> sine_inverse(std::span<const double> coeffs);

}  // namespace phmc
