#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string_view>
#include <vector>

#include "ruinlab/model.hpp"
#include "ruinlab/random.hpp"

namespace ruinlab {

/// Ingredients of one step S_n = lambda_n S_{n-1} + zeta_n.
struct EmbeddedStep {
  double lambda = 1.0;  // exp(-nu)
  double zeta = 0.0;
  double nu = 0.0;  // -(k_total + z_total)
  double k_total = 0.0;
  double z_total = 0.0;
  double tau = 0.0;
  double claim = 0.0;
  double premium_integral = 0.0;  // int_0^tau exp(K(s)+Z(s)) c(T+s) ds
  double growth_integral = 0.0;   // int_0^tau exp(K(s)+Z(s)) ds
  bool coarse_grid = false;
};

/// Builds embedded steps for one model, reusing scratch buffers between calls.
/// Not thread-safe; use one per worker.
class StepBuilder {
 public:
  explicit StepBuilder(const ModelConfig& config) : config_(&config) {}

  /// Draws the regime (regime and Brownian streams) and then the claim
  /// (claims stream), and returns the step for an interval starting at `t_start`.
  EmbeddedStep next(StreamSet& streams, double t_start);

  /// Step from an already drawn regime and claim.
  EmbeddedStep build(const RegimeDraw& draw, double claim, double t_start);

  /// Regime of the most recent `next` call.
  const RegimeDraw& last_draw() const noexcept { return draw_; }

  /// Exponents K(s_k) + Z(s_k) at the grid nodes of the most recent step,
  /// s_0 = 0 through s_m = tau.
  const std::vector<double>& exponents() const noexcept { return x_; }

 private:
  const ModelConfig* config_;
  RegimeDraw draw_;
  std::vector<double> x_;
  std::vector<double> xp_;
};

enum class StopReason { ruin, barrier, max_steps };
std::string_view to_string(StopReason r);

struct ChainTrajectory {
  std::vector<double> values;  // S_0 = u, S_1, ...
  std::vector<EmbeddedStep> steps;
  std::optional<std::size_t> ruin_index;
  StopReason stopped_reason = StopReason::max_steps;
};

/// Survival barrier for initial reserve u: multiple * max(u, monetary scale).
double survival_barrier(const ModelConfig& config, double u, double barrier_multiple);

/// Iterates the chain from S_0 = u until ruin, the survival barrier or max_steps.
ChainTrajectory simulate_chain(double u, const ModelConfig& config, std::size_t max_steps,
                               double barrier_multiple, StreamSet& streams);

struct ContinuousPath {
  double min_value = 0.0;
  bool ruined = false;
  std::vector<double> claim_times;
  std::vector<double> values_at_claims;  // X(T_n) after the claim is paid
};

/// Integrates the reserve process forward cell by cell on the regime grid,
/// using the same draws as StepBuilder::next. Within a cell the investment
/// factor is the exact geometric Brownian motion factor; the premium inflow
/// uses the trapezoid rule on the cell.
ContinuousPath simulate_continuous(double u, const ModelConfig& config, double horizon, StreamSet& streams);

/// CSV with header n,S_n,lambda_n,zeta_n,nu_n.
void write_trajectory_csv(std::ostream& os, const ChainTrajectory& t);

}  // namespace ruinlab
