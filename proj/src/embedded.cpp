#include "ruinlab/embedded.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ruinlab/error.hpp"
#include "ruinlab/kernels.hpp"

namespace ruinlab {

namespace {

constexpr double kCoarseCells = 4.0;

double classical_premium(const PremiumSpec& spec, double t_start, double tau) {
  if (const auto* c = std::get_if<premium::Constant>(&spec)) return c->c * tau;
  if (const auto* d = std::get_if<premium::ExponentialDecay>(&spec)) {
    if (d->gamma_rate == 0.0) return d->c1 * tau;
    return d->c1 * std::exp(d->gamma_rate * t_start) * std::expm1(d->gamma_rate * tau) / d->gamma_rate;
  }
  return 0.0;
}

}  // namespace

EmbeddedStep StepBuilder::next(StreamSet& streams, double t_start) {
  draw_regime(*config_, streams, draw_);
  const double claim = draw_claim(*config_, streams);
  return build(draw_, claim, t_start);
}

EmbeddedStep StepBuilder::build(const RegimeDraw& d, double claim, double t_start) {
  EmbeddedStep st;
  st.tau = d.tau;
  st.claim = claim;
  const PremiumSpec& prem = config_->premium;

  if (d.cells() == 0) {
    st.premium_integral = classical_premium(prem, t_start, d.tau);
    st.growth_integral = d.tau;
    st.zeta = st.premium_integral - claim;
    x_.assign(1, 0.0);
    return st;
  }

  const std::size_t m = d.cells();
  st.coarse_grid = d.tau / d.grid_step < kCoarseCells;
  x_.resize(m + 1);
  x_[m] = 0.0;
  double k_acc = 0.0;
  double z_acc = 0.0;
  for (std::size_t c = m; c-- > 0;) {
    const double w = d.cell_width(c);
    const double s = d.sigma_path[c];
    k_acc += (d.mu_path[c] - 0.5 * s * s) * w;
    z_acc += s * d.wiener_increments[c];
    x_[c] = k_acc + z_acc;
  }
  if (d.constant) {
    const double s = d.sigma_path[0];
    st.k_total = (d.mu_path[0] - 0.5 * s * s) * d.tau;
    st.z_total = s * d.w_end;
    x_[0] = st.k_total + st.z_total;
  } else {
    st.k_total = k_acc;
    st.z_total = z_acc;
  }
  st.nu = -(st.k_total + st.z_total);
  st.lambda = std::exp(-st.nu);

  const auto& kt = kernels::active();
  st.growth_integral = kt.exp_trapezoid(x_, d.grid_step, d.last_step);
  if (const auto* c = std::get_if<premium::Constant>(&prem)) {
    st.premium_integral = c->c * st.growth_integral;
  } else if (const auto* e = std::get_if<premium::ExponentialDecay>(&prem); e && e->c1 > 0) {
    const double log_c1 = std::log(e->c1);
    xp_.resize(m + 1);
    for (std::size_t k = 0; k < m; ++k)
      xp_[k] = x_[k] + log_c1 + e->gamma_rate * (t_start + static_cast<double>(k) * d.grid_step);
    xp_[m] = log_c1 + e->gamma_rate * (t_start + d.tau);
    st.premium_integral = kt.exp_trapezoid(xp_, d.grid_step, d.last_step);
  }
  st.zeta = st.premium_integral - claim;
  return st;
}

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::ruin:
      return "ruin";
    case StopReason::barrier:
      return "barrier";
    case StopReason::max_steps:
      return "max_steps";
  }
  return "unknown";
}

double survival_barrier(const ModelConfig& config, double u, double barrier_multiple) {
  return barrier_multiple * std::max(u, config.monetary_scale());
}

ChainTrajectory simulate_chain(double u, const ModelConfig& config, std::size_t max_steps,
                               double barrier_multiple, StreamSet& streams) {
  if (!(u >= 0)) throw ConfigError("u", "initial reserve must be nonnegative");
  if (max_steps < 1) throw ConfigError("max_steps", "must be at least 1");
  if (!(barrier_multiple > 1)) throw ConfigError("barrier_multiple", "must exceed 1");

  const double barrier = survival_barrier(config, u, barrier_multiple);
  ChainTrajectory out;
  out.values.push_back(u);
  StepBuilder builder(config);
  double s = u;
  double t = 0.0;
  for (std::size_t n = 1; n <= max_steps; ++n) {
    const EmbeddedStep st = builder.next(streams, t);
    t += st.tau;
    s = st.lambda * s + st.zeta;
    out.values.push_back(s);
    out.steps.push_back(st);
    if (s < 0) {
      out.ruin_index = n;
      out.stopped_reason = StopReason::ruin;
      return out;
    }
    if (s > barrier) {
      out.stopped_reason = StopReason::barrier;
      return out;
    }
  }
  out.stopped_reason = StopReason::max_steps;
  return out;
}

ContinuousPath simulate_continuous(double u, const ModelConfig& config, double horizon, StreamSet& streams) {
  if (!(horizon > 0)) throw ConfigError("horizon", "must be positive");
  ContinuousPath out;
  out.min_value = u;
  double x = u;
  double t = 0.0;
  RegimeDraw d;
  while (t < horizon) {
    draw_regime(config, streams, d);
    const double claim = draw_claim(config, streams);
    const double t_end = std::min(t + d.tau, horizon);
    const bool claim_in_horizon = t + d.tau <= horizon;

    if (d.cells() == 0) {
      x += classical_premium(config.premium, t, t_end - t);
    } else {
      double s = 0.0;
      for (std::size_t c = 0; c < d.cells(); ++c) {
        const double w = d.cell_width(c);
        if (t + s >= t_end) break;
        const double sg = d.sigma_path[c];
        const double g = std::exp((d.mu_path[c] - 0.5 * sg * sg) * w + sg * d.wiener_increments[c]);
        const double c0 = premium_rate(config.premium, t + s);
        const double c1 = premium_rate(config.premium, t + s + w);
        x = g * x + 0.5 * w * (g * c0 + c1);
        s += w;
        out.min_value = std::min(out.min_value, x);
      }
    }
    t += d.tau;
    if (!claim_in_horizon) break;
    x -= claim;
    out.min_value = std::min(out.min_value, x);
    out.claim_times.push_back(t);
    out.values_at_claims.push_back(x);
  }
  out.ruined = out.min_value < 0;
  return out;
}

void write_trajectory_csv(std::ostream& os, const ChainTrajectory& t) {
  os << "n,S_n,lambda_n,zeta_n,nu_n\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "0,%.17g,,,\n", t.values.front());
  os << buf;
  for (std::size_t n = 0; n < t.steps.size(); ++n) {
    const auto& st = t.steps[n];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g\n", n + 1, t.values[n + 1], st.lambda, st.zeta,
                  st.nu);
    os << buf;
  }
}

}  // namespace ruinlab
