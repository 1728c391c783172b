#pragma once

#include <functional>
#include <span>
#include <vector>

namespace phmc::stats {

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = slope x + intercept. Needs >= 2 distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Asymptotic Kolmogorov survival function Q(lambda) = 2 sum (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

double normal_cdf(double x, double mean = 0.0, double sd = 1.0);

double mean(std::span<const double> x);
double variance(std::span<const double> x);  // unbiased
// Linear-interpolated empirical quantile, p in [0, 1].
double quantile(std::vector<double> x, double p);

}  // namespace phmc::stats
