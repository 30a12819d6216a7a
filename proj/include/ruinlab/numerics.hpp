#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ruinlab::numerics {

/// Result of an adaptive quadrature. `capped` is set when the node cap was
/// reached before the absolute tolerance; the value is then approximate.
struct QuadResult {
  double value = 0.0;
  double abs_error = 0.0;
  bool capped = false;
};

inline constexpr double kQuadAbsTol = 1e-10;
inline constexpr std::size_t kQuadNodeCap = 1'000'000;

/// Adaptive Gauss-Kronrod (31 point) on [a, b]; either bound may be infinite.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol = kQuadAbsTol);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Two-sided 95% Wilson score interval for `successes` out of `trials`.
Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959963984540054);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double r_squared = 0.0;
};

/// Weighted least squares y ~ intercept + slope * x.
///
/// When `weights_are_inverse_variances` the slope standard error is
/// 1 / sqrt(sum w (x - xbar)^2); otherwise it is scaled by the residual variance.
LinearFit weighted_linear_fit(std::span<const double> x, std::span<const double> y,
                              std::span<const double> w, bool weights_are_inverse_variances);

/// Ordinary least squares.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b|.
double ks_statistic(std::vector<double> a, std::vector<double> b);

}  // namespace ruinlab::numerics
