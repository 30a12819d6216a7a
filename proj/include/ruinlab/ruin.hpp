#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ruinlab/model.hpp"
#include "ruinlab/parallel.hpp"

namespace ruinlab {

struct RuinOptions {
  std::size_t n_paths = 100'000;
  std::size_t max_steps = 10'000;
  double barrier_multiple = 1e3;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::size_t chunk = kDefaultChunk;
};

struct RuinEstimate {
  double u = 0.0;
  double psi_hat = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  double ci_halfwidth = 0.0;  // half the Wilson interval width
  std::uint64_t n_paths = 0;
  std::uint64_t ruined = 0;
  std::uint64_t censored = 0;        // max_steps reached, counted as survived
  std::uint64_t barrier_stopped = 0;  // declared survived at the barrier
  double censored_fraction = 0.0;
};

/// psi_hat on a grid of initial reserves, all lanes of a path driven by the
/// same draws (common random numbers). Path i uses StreamSet(seed, i). One
/// survival barrier, multiple * max(max u, monetary scale), serves the whole
/// grid, which makes psi_hat exactly nonincreasing in u.
std::vector<RuinEstimate> estimate_psi_grid(const ModelConfig& config, const std::vector<double>& u_grid,
                                            const RuinOptions& options);

RuinEstimate estimate_psi(double u, const ModelConfig& config, const RuinOptions& options);

struct ClassicalPsi {
  double psi = 1.0;
  bool loading_violated = false;
};

/// Exact ruin probability for Poisson(lambda_rate) arrivals, exponential
/// claims of mean m and premium rate c; psi = 1 flagged when lambda m >= c.
ClassicalPsi classical_psi(double lambda_rate, double claim_mean, double c, double u);

struct TailFit {
  double slope = 0.0;
  double slope_stderr = 0.0;
  double intercept = 0.0;
  std::vector<double> u_grid;
  double r_squared = 0.0;
  std::vector<double> dropped;  // grid points with psi_hat = 0
};

/// Weighted least squares of log psi_hat on log u, weights 1 / (relative CI)^2.
/// Zero estimates are dropped; throws NumericalError with fewer than 4 points left.
TailFit fit_tail(const std::vector<RuinEstimate>& estimates);

struct BoundsCheck {
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  double spread = 0.0;
};

/// r(u) = u^beta psi_hat(u); spread = max r / min r.
BoundsCheck bounds_check(double beta, const std::vector<RuinEstimate>& estimates);

struct WalkExceedance {
  double u = 0.0;
  double p_hat = 0.0;
  double ci_halfwidth = 0.0;
};

/// P(max_n sum_{k<=n} nu_k > ln u). A walk stops once below -ln(barrier_multiple)
/// or above ln(max u).
std::vector<WalkExceedance> rw_max_diagnostic(const ModelConfig& config, const std::vector<double>& u_grid,
                                              const RuinOptions& options);

}  // namespace ruinlab
