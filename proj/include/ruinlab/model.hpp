#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "ruinlab/distribution.hpp"
#include "ruinlab/ext_real.hpp"
#include "ruinlab/random.hpp"
#include "ruinlab/theta_law.hpp"

namespace ruinlab {

namespace regime {
/// Investment disabled: the reserve earns nothing between claims (lambda = 1).
struct None {};
/// Coefficients fixed over each inter-claim interval, Theta redrawn at every claim.
struct Constant {
  ThetaLaw theta;
};
/// Coefficients piecewise constant on a grid of width `node_step`, each node
/// drawn independently from `mu` and `sigma`.
struct Piecewise {
  double node_step;
  Distribution mu;
  Distribution sigma;
};
}  // namespace regime

using RegimeSpec = std::variant<regime::None, regime::Constant, regime::Piecewise>;

namespace premium {
struct Constant {
  double c;
};
/// c(t) = c1 * exp(gamma_rate * t), gamma_rate <= 0.
struct ExponentialDecay {
  double c1;
  double gamma_rate;
};
struct Zero {};
}  // namespace premium

using PremiumSpec = std::variant<premium::Constant, premium::ExponentialDecay, premium::Zero>;

double premium_rate(const PremiumSpec& spec, double t);

/// Full model: claim and inter-arrival laws, regime law, premium and bounds.
struct ModelConfig {
  Distribution claim = Distribution::exponential(1.0);
  Distribution interarrival = Distribution::exponential(1.0);
  RegimeSpec regime = regime::None{};
  PremiumSpec premium = premium::Zero{};
  double mu_lower = 0.0;
  double sigma_upper = 1.0;
  double c_bar = 0.0;
  double grid_step = 1e-3;

  /// Throws ConfigError naming the offending field.
  void validate() const;

  bool investment() const noexcept { return !std::holds_alternative<regime::None>(regime); }
  bool constant_coefficients() const noexcept { return std::holds_alternative<regime::Constant>(regime); }
  const ThetaLaw* theta() const noexcept;

  /// E K = E int_0^tau (mu(u) - sigma^2(u)/2) du.
  ExtReal expected_K() const;
  bool ek_positive() const;

  /// Monetary unit used to floor survival barriers: E xi, or c_bar * E tau
  /// when claims have zero or infinite mean.
  double monetary_scale() const;

  /// The same model with every monetary quantity multiplied by `k`.
  ModelConfig scaled(double k) const;
};

/// One i.i.d. regime quadruple restricted to its inter-claim interval.
///
/// The grid has `cells()` cells of width `grid_step` except the last, of
/// width `last_step`. Coefficient paths are right-continuous and constant per cell.
struct RegimeDraw {
  double tau = 0.0;
  double grid_step = 0.0;
  double last_step = 0.0;
  std::vector<double> mu_path;
  std::vector<double> sigma_path;
  std::vector<double> wiener_increments;
  double w_end = 0.0;  // W(tau)
  bool constant = false;

  std::size_t cells() const noexcept { return wiener_increments.size(); }
  double cell_width(std::size_t c) const noexcept { return c + 1 == cells() ? last_step : grid_step; }
};

/// Draws tau, the coefficient paths and the Brownian increments into `out`,
/// reusing its storage. tau and the coefficients come from the regime stream,
/// the increments from the Brownian stream. In constant mode W(tau) is drawn
/// exactly and the grid is filled by a Brownian bridge.
void draw_regime(const ModelConfig& config, StreamSet& streams, RegimeDraw& out);
RegimeDraw draw_regime(const ModelConfig& config, StreamSet& streams);

/// tau, Theta and W(tau) only, for constant-coefficient models (no grid).
struct NuDraw {
  double tau;
  ThetaPoint theta;
  double w_end;
  double nu() const;
};
NuDraw draw_nu_constant(const ModelConfig& config, StreamSet& streams);

double draw_claim(const ModelConfig& config, StreamSet& streams);

}  // namespace ruinlab
