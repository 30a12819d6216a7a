#include "ruinlab/model.hpp"

#include <algorithm>
#include <cmath>

#include "ruinlab/error.hpp"

namespace ruinlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kMaxCellsPerInterval = 5e7;

// Positive probability of sigma = 0. Polytope boundaries are null sets; the
// zeta family keeps its j = 1 atom.
bool sigma_zero_mass(const ThetaLaw& law) {
  return std::visit(overloaded{[](const theta::Finite& f) {
                                 return std::any_of(f.points.begin(), f.points.end(),
                                                    [](const ThetaPoint& p) { return !(p.half_sigma2 > 0); });
                               },
                               [](const theta::PolytopeUniform&) { return false; },
                               [](const theta::Product& p) { return !(p.half_sigma2.cdf(0.0) == 0.0); },
                               [](const theta::ZetaFamily&) { return false; }},
                    law.kind());
}

}  // namespace

double premium_rate(const PremiumSpec& spec, double t) {
  return std::visit(overloaded{[](const premium::Constant& p) { return p.c; },
                               [t](const premium::ExponentialDecay& p) { return p.c1 * std::exp(p.gamma_rate * t); },
                               [](const premium::Zero&) { return 0.0; }},
                    spec);
}

const ThetaLaw* ModelConfig::theta() const noexcept {
  const auto* c = std::get_if<regime::Constant>(&regime);
  return c ? &c->theta : nullptr;
}

void ModelConfig::validate() const {
  if (!std::isfinite(mu_lower)) throw ConfigError("model.mu_lower", "must be finite");
  if (!(sigma_upper > 0) || !std::isfinite(sigma_upper)) throw ConfigError("model.sigma_upper", "must be positive");
  if (!(c_bar >= 0) || !std::isfinite(c_bar)) throw ConfigError("model.c_bar", "must be nonnegative");
  if (!(grid_step > 0) || !std::isfinite(grid_step)) throw ConfigError("model.grid_step", "must be positive");

  if (claim.support().lo < 0) throw ConfigError("model.claim", "claim sizes must be nonnegative");
  if (interarrival.is_pareto()) throw ConfigError("model.interarrival", "pareto is permitted for claim sizes only");
  if (interarrival.support().lo < 0 || interarrival.support().hi <= 0.0)
    throw ConfigError("model.interarrival", "inter-arrival times must be positive");

  const double hs2_max = 0.5 * sigma_upper * sigma_upper;
  std::visit(overloaded{[](const regime::None&) {},
                        [&](const regime::Constant& r) {
                          if (const auto* p = std::get_if<theta::Product>(&r.theta.kind());
                              p && (p->mu.is_pareto() || p->half_sigma2.is_pareto()))
                            throw ConfigError("model.regime.theta", "pareto is permitted for claim sizes only");
                          const ThetaBox box = r.theta.bounding_box();
                          if (box.mu_lo < mu_lower)
                            throw ConfigError("model.regime.theta", "support must satisfy mu >= mu_lower");
                          if (sigma_zero_mass(r.theta))
                            throw ConfigError("model.regime.theta", "volatility must be strictly positive");
                          if (box.half_sigma2_hi > hs2_max * (1 + 1e-12))
                            throw ConfigError("model.regime.theta", "support must satisfy sigma <= sigma_upper");
                        },
                        [&](const regime::Piecewise& r) {
                          if (!(r.node_step > 0) || !std::isfinite(r.node_step))
                            throw ConfigError("model.regime.node_step", "must be positive");
                          if (r.mu.is_pareto() || r.sigma.is_pareto())
                            throw ConfigError("model.regime", "pareto is permitted for claim sizes only");
                          if (r.mu.support().lo < mu_lower)
                            throw ConfigError("model.regime.mu", "support must satisfy mu >= mu_lower");
                          const Support s = r.sigma.support();
                          if (!(s.lo > 0)) throw ConfigError("model.regime.sigma", "volatility must be strictly positive");
                          if (s.hi > sigma_upper * (1 + 1e-12))
                            throw ConfigError("model.regime.sigma", "support must satisfy sigma <= sigma_upper");
                        }},
             regime);

  std::visit(overloaded{[&](const premium::Constant& p) {
                          if (!(p.c >= 0) || p.c > c_bar)
                            throw ConfigError("model.premium.c", "premium rate must lie in [0, c_bar]");
                        },
                        [&](const premium::ExponentialDecay& p) {
                          if (!(p.c1 >= 0) || p.c1 > c_bar)
                            throw ConfigError("model.premium.c1", "premium rate must lie in [0, c_bar]");
                          if (!(p.gamma_rate <= 0))
                            throw ConfigError("model.premium.gamma_rate", "must be nonpositive");
                        },
                        [](const premium::Zero&) {}},
             premium);
}

ExtReal ModelConfig::expected_K() const {
  const ExtReal mean_tau = interarrival.mean();
  if (mean_tau.is_infinite()) return ExtReal::infinity();
  return std::visit(overloaded{[](const regime::None&) { return ExtReal(0.0); },
                               [&](const regime::Constant& r) { return ExtReal(r.theta.mean_drift() * mean_tau.value()); },
                               [&](const regime::Piecewise& r) {
                                 const double drift = r.mu.mean().value() - 0.5 * r.sigma.moment(2.0).value();
                                 return ExtReal(drift * mean_tau.value());
                               }},
                    regime);
}

bool ModelConfig::ek_positive() const {
  const ExtReal ek = expected_K();
  return ek.is_finite() && ek.value() > 0;
}

double ModelConfig::monetary_scale() const {
  const ExtReal m = claim.mean();
  if (m.is_finite() && m.value() > 0) return m.value();
  const ExtReal t = interarrival.mean();
  if (c_bar > 0 && t.is_finite()) return c_bar * t.value();
  return 1.0;
}

ModelConfig ModelConfig::scaled(double k) const {
  ModelConfig out = *this;
  out.claim = claim.scaled(k);
  out.c_bar = c_bar * k;
  std::visit(overloaded{[k](premium::Constant& p) { p.c *= k; },
                        [k](premium::ExponentialDecay& p) { p.c1 *= k; }, [](premium::Zero&) {}},
             out.premium);
  return out;
}

void draw_regime(const ModelConfig& config, StreamSet& streams, RegimeDraw& out) {
  out.tau = config.interarrival.sample(streams.regime);
  out.mu_path.clear();
  out.sigma_path.clear();
  out.wiener_increments.clear();
  out.w_end = 0.0;
  out.grid_step = config.grid_step;
  out.constant = config.constant_coefficients();
  if (!config.investment()) {
    out.last_step = out.tau;
    return;
  }

  const double h = config.grid_step;
  const double ratio = out.tau / h;
  if (ratio > kMaxCellsPerInterval) throw ConfigError("model.grid_step", "grid too fine for the drawn interval");
  std::size_t m = static_cast<std::size_t>(std::ceil(ratio));
  if (m == 0) m = 1;
  double last = out.tau - static_cast<double>(m - 1) * h;
  if (last <= 0.0 && m > 1) {
    --m;
    last = out.tau - static_cast<double>(m - 1) * h;
  }
  out.last_step = last;
  const double sqrt_h = std::sqrt(h);
  const double sqrt_last = std::sqrt(last);
  out.wiener_increments.resize(m);

  if (const auto* c = std::get_if<regime::Constant>(&config.regime)) {
    const ThetaPoint th = c->theta.sample(streams.regime);
    out.mu_path.assign(m, th.mu);
    out.sigma_path.assign(m, th.sigma());
    out.w_end = std::sqrt(out.tau) * streams.brownian();
    double free_end = 0.0;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      out.wiener_increments[k] = sqrt_h * streams.brownian();
      free_end += out.wiener_increments[k];
    }
    out.wiener_increments[m - 1] = sqrt_last * streams.brownian();
    free_end += out.wiener_increments[m - 1];
    // Brownian bridge pinned at W(tau) = w_end.
    const double slope = (free_end - out.w_end) / out.tau;
    for (std::size_t k = 0; k + 1 < m; ++k) out.wiener_increments[k] -= slope * h;
    out.wiener_increments[m - 1] -= slope * last;
    return;
  }

  const auto& pw = std::get<regime::Piecewise>(config.regime);
  out.mu_path.resize(m);
  out.sigma_path.resize(m);
  std::size_t node = static_cast<std::size_t>(-1);
  double mu = 0.0, sigma = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t idx = static_cast<std::size_t>(std::floor(static_cast<double>(k) * h / pw.node_step));
    while (node != idx) {
      node = node == static_cast<std::size_t>(-1) ? 0 : node + 1;
      mu = pw.mu.sample(streams.regime);
      sigma = pw.sigma.sample(streams.regime);
    }
    out.mu_path[k] = mu;
    out.sigma_path[k] = sigma;
  }
  for (std::size_t k = 0; k < m; ++k) {
    out.wiener_increments[k] = (k + 1 == m ? sqrt_last : sqrt_h) * streams.brownian();
    out.w_end += out.wiener_increments[k];
  }
}

RegimeDraw draw_regime(const ModelConfig& config, StreamSet& streams) {
  RegimeDraw d;
  draw_regime(config, streams, d);
  return d;
}

double NuDraw::nu() const { return -(theta.mu - theta.half_sigma2) * tau - theta.sigma() * w_end; }

NuDraw draw_nu_constant(const ModelConfig& config, StreamSet& streams) {
  const ThetaLaw* law = config.theta();
  if (law == nullptr) throw ConfigError("model.regime", "constant-coefficient regime required");
  NuDraw d{};
  d.tau = config.interarrival.sample(streams.regime);
  d.theta = law->sample(streams.regime);
  d.w_end = std::sqrt(d.tau) * streams.brownian();
  return d;
}

double draw_claim(const ModelConfig& config, StreamSet& streams) { return config.claim.sample(streams.claims); }

}  // namespace ruinlab
