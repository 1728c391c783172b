#include "phmc/sine_transform.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace phmc {
namespace {

// FFTW planning is not thread-safe; execution of an existing plan on new
// arrays is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(std::size_t n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    std::vector<double> in(n), out(n);
    fftw_plan plan = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_RODFT00,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw std::runtime_error("fftw: could not create DST-I plan");
    plans_.emplace(n, plan);
    return plan;
  }

 private:
  std::mutex mutex_;
  std::map<std::size_t, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

// RODFT00: Y_k = 2 sum_j X_j sin(pi (j+1)(k+1) / (n+1)).
void dst1(std::span<const double> in, std::span<double> out, double scale) {
  if (in.size() != out.size()) throw std::invalid_argument("sine transform: size mismatch");
  const std::size_t n = in.size();
  if (n == 0) return;
  std::vector<double> buffer(in.begin(), in.end());
  fftw_execute_r2r(plan_cache().get(n), buffer.data(), out.data());
  for (double& y : out) y *= scale;
}

}  // namespace

void sine_forward(std::span<const double> grid, std::span<double> coeffs) {
  const double w = 1.0 / static_cast<double>(grid.size() + 1);
  dst1(grid, coeffs, w / std::sqrt(2.0));
}

void sine_inverse(std::span<const double> coeffs, std::span<double> grid) {
  dst1(coeffs, grid, 1.0 / std::sqrt(2.0));
}

std::vector<double> sine_forward(std::span<const double> grid) {
  std::vector<double> out(grid.size());
  sine_forward(grid, out);
  return out;
}

std::vector<double> sine_inverse(std::span<const double> coeffs) {
  std::vector<double> out(coeffs.size());
  sine_inverse(coeffs, out);
  return out;
}

}  // namespace phmc
