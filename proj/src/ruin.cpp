#include "ruinlab/ruin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ruinlab/embedded.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/kernels.hpp"
#include "ruinlab/numerics.hpp"

namespace ruinlab {

namespace {

struct Counts {
  std::vector<std::uint64_t> ruined, censored, barrier;
  explicit Counts(std::size_t k = 0) : ruined(k, 0), censored(k, 0), barrier(k, 0) {}
};

void merge(Counts& into, const Counts& c) {
  for (std::size_t j = 0; j < into.ruined.size(); ++j) {
    into.ruined[j] += c.ruined[j];
    into.censored[j] += c.censored[j];
    into.barrier[j] += c.barrier[j];
  }
}

RuinEstimate make_estimate(double u, std::uint64_t n, std::uint64_t ruined, std::uint64_t censored,
                           std::uint64_t barrier) {
  RuinEstimate e;
  e.u = u;
  e.n_paths = n;
  e.ruined = ruined;
  e.censored = censored;
  e.barrier_stopped = barrier;
  e.psi_hat = static_cast<double>(ruined) / static_cast<double>(n);
  const auto ci = numerics::wilson_interval(ruined, n);
  e.ci_lo = ci.lo;
  e.ci_hi = ci.hi;
  e.ci_halfwidth = 0.5 * (ci.hi - ci.lo);
  e.censored_fraction = static_cast<double>(censored) / static_cast<double>(n);
  return e;
}

void check_options(const RuinOptions& o) {
  if (o.n_paths < 100) throw ConfigError("ruin.n_paths", "need at least 100 paths");
  if (o.max_steps < 1) throw ConfigError("ruin.max_steps", "must be at least 1");
  if (!(o.barrier_multiple > 1)) throw ConfigError("ruin.barrier_multiple", "must exceed 1");
}

}  // namespace

std::vector<RuinEstimate> estimate_psi_grid(const ModelConfig& config, const std::vector<double>& u_grid,
                                            const RuinOptions& options) {
  config.validate();
  check_options(options);
  if (u_grid.empty()) throw ConfigError("ruin.u_grid", "empty grid");
  for (double u : u_grid)
    if (!(u >= 0) || !std::isfinite(u)) throw ConfigError("ruin.u_grid", "initial reserves must be finite and nonnegative");

  const std::size_t k = u_grid.size();
  const double u_max = *std::max_element(u_grid.begin(), u_grid.end());
  const double barrier = survival_barrier(config, u_max, options.barrier_multiple);
  const auto& kt = kernels::active();

  const Counts total = chunked_reduce<Counts>(
      options.n_paths, options.chunk, options.workers, Counts(k),
      [&](Counts& acc, std::size_t begin, std::size_t end) {
        StepBuilder builder(config);
        std::vector<double> values(k);
        std::vector<kernels::LaneState> state(k);
        const std::vector<double> barriers(k, barrier);
        for (std::size_t i = begin; i < end; ++i) {
          StreamSet streams(options.seed, i);
          std::copy(u_grid.begin(), u_grid.end(), values.begin());
          std::fill(state.begin(), state.end(), kernels::LaneState::active);
          double t = 0;
          std::size_t active = k;
          for (std::size_t n = 0; n < options.max_steps && active > 0; ++n) {
            const EmbeddedStep st = builder.next(streams, t);
            t += st.tau;
            active = kt.affine_advance(values, state, barriers, st.lambda, st.zeta);
          }
          for (std::size_t j = 0; j < k; ++j) {
            switch (state[j]) {
              case kernels::LaneState::ruined:
                ++acc.ruined[j];
                break;
              case kernels::LaneState::barrier:
                ++acc.barrier[j];
                break;
              case kernels::LaneState::active:
                ++acc.censored[j];
                break;
            }
          }
        }
      },
      merge);

  std::vector<RuinEstimate> out;
  out.reserve(k);
  for (std::size_t j = 0; j < k; ++j)
    out.push_back(make_estimate(u_grid[j], options.n_paths, total.ruined[j], total.censored[j], total.barrier[j]));
  return out;
}

RuinEstimate estimate_psi(double u, const ModelConfig& config, const RuinOptions& options) {
  return estimate_psi_grid(config, {u}, options).front();
}

ClassicalPsi classical_psi(double lambda_rate, double claim_mean, double c, double u) {
  if (!(lambda_rate > 0) || !(claim_mean > 0) || !(c >= 0) || !(u >= 0))
    throw ConfigError("classical", "needs lambda > 0, m > 0, c >= 0, u >= 0");
  if (lambda_rate * claim_mean >= c) return {1.0, true};
  const double ratio = lambda_rate * claim_mean / c;
  return {ratio * std::exp(-(1.0 / claim_mean - lambda_rate / c) * u), false};
}

TailFit fit_tail(const std::vector<RuinEstimate>& estimates) {
  TailFit fit;
  std::vector<double> x, y, w;
  bool all_weighted = true;
  std::vector<const RuinEstimate*> kept;
  for (const auto& e : estimates) {
    if (!(e.psi_hat > 0)) {
      fit.dropped.push_back(e.u);
      continue;
    }
    if (!(e.u > 0)) throw ConfigError("u_grid", "tail fit needs positive u");
    kept.push_back(&e);
    if (!(e.ci_halfwidth > 0)) all_weighted = false;
  }
  if (kept.size() < 4) throw NumericalError("tail fit needs at least 4 grid points with psi_hat > 0");
  for (std::size_t i = 1; i < kept.size(); ++i)
    if (!(kept[i]->u > kept[i - 1]->u)) throw ConfigError("u_grid", "must be strictly increasing");
  for (const auto* e : kept) {
    fit.u_grid.push_back(e->u);
    x.push_back(std::log(e->u));
    y.push_back(std::log(e->psi_hat));
    const double rel = e->ci_halfwidth / e->psi_hat;
    w.push_back(all_weighted ? 1.0 / (rel * rel) : 1.0);
  }
  const auto lf = numerics::weighted_linear_fit(x, y, w, false);
  fit.slope = lf.slope;
  fit.slope_stderr = lf.slope_stderr;
  fit.intercept = lf.intercept;
  fit.r_squared = lf.r_squared;
  return fit;
}

BoundsCheck bounds_check(double beta, const std::vector<RuinEstimate>& estimates) {
  if (estimates.empty()) throw ConfigError("estimates", "empty grid");
  BoundsCheck b{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  for (const auto& e : estimates) {
    if (!(e.psi_hat > 0)) throw NumericalError("bounds check needs psi_hat > 0 on the grid");
    const double r = std::pow(e.u, beta) * e.psi_hat;
    b.ratio_min = std::min(b.ratio_min, r);
    b.ratio_max = std::max(b.ratio_max, r);
  }
  b.spread = b.ratio_max / b.ratio_min;
  return b;
}

std::vector<WalkExceedance> rw_max_diagnostic(const ModelConfig& config, const std::vector<double>& u_grid,
                                              const RuinOptions& options) {
  config.validate();
  check_options(options);
  if (u_grid.empty()) throw ConfigError("u_grid", "empty grid");
  const std::size_t k = u_grid.size();
  std::vector<double> level(k);
  double top = -std::numeric_limits<double>::infinity();
  double bottom = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    if (!(u_grid[j] >= 0)) throw ConfigError("u_grid", "must be nonnegative");
    level[j] = std::log(u_grid[j]);
    top = std::max(top, level[j]);
    if (u_grid[j] > 0) bottom = std::min(bottom, level[j]);
  }
  const double stop_low = bottom - std::log(options.barrier_multiple);

  using Hits = std::vector<std::uint64_t>;
  const Hits hits = chunked_reduce<Hits>(
      options.n_paths, options.chunk, options.workers, Hits(k, 0),
      [&](Hits& acc, std::size_t begin, std::size_t end) {
        RegimeDraw d;
        for (std::size_t i = begin; i < end; ++i) {
          StreamSet streams(options.seed, i);
          double walk = 0, max_walk = -std::numeric_limits<double>::infinity();
          for (std::size_t n = 0; n < options.max_steps; ++n) {
            double nu = 0;
            if (config.constant_coefficients()) {
              nu = draw_nu_constant(config, streams).nu();
            } else if (config.investment()) {
              draw_regime(config, streams, d);
              double kk = 0, z = 0;
              for (std::size_t c = 0; c < d.cells(); ++c) {
                const double s = d.sigma_path[c];
                kk += (d.mu_path[c] - 0.5 * s * s) * d.cell_width(c);
                z += s * d.wiener_increments[c];
              }
              nu = -(kk + z);
            }
            walk += nu;
            max_walk = std::max(max_walk, walk);
            if (walk > top || walk < stop_low) break;
          }
          for (std::size_t j = 0; j < k; ++j)
            if (max_walk > level[j]) ++acc[j];
        }
      },
      [](Hits& into, const Hits& h) {
        for (std::size_t j = 0; j < into.size(); ++j) into[j] += h[j];
      });

  std::vector<WalkExceedance> out;
  for (std::size_t j = 0; j < k; ++j) {
    const auto ci = numerics::wilson_interval(hits[j], options.n_paths);
    out.push_back({u_grid[j], static_cast<double>(hits[j]) / static_cast<double>(options.n_paths),
                   0.5 * (ci.hi - ci.lo)});
  }
  return out;
}

}  // namespace ruinlab
