#include "ruinlab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>

#include "ruinlab/error.hpp"

namespace ruinlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, std::string_view what) {
  if (!ok) throw ConfigError("distribution", std::string(what));
}

bool finite(double x) { return std::isfinite(x); }

// E|U|^p for U uniform on [lo, hi].
double uniform_abs_moment(double lo, double hi, double p) {
  auto prim = [p](double x) {  // integral of |t|^p from 0 to x, signed
    const double a = std::pow(std::abs(x), p + 1.0) / (p + 1.0);
    return x >= 0 ? a : -a;
  };
  return (prim(hi) - prim(lo)) / (hi - lo);
}

}  // namespace

Distribution Distribution::exponential(double rate) {
  require(finite(rate) && rate > 0, "exponential rate must be positive");
  return Distribution(dist::Exponential{rate});
}

Distribution Distribution::gamma(double shape, double scale) {
  require(finite(shape) && shape > 0, "gamma shape must be positive");
  require(finite(scale) && scale > 0, "gamma scale must be positive");
  return Distribution(dist::Gamma{shape, scale});
}

Distribution Distribution::deterministic(double value) {
  require(finite(value), "deterministic value must be finite");
  return Distribution(dist::Deterministic{value});
}

Distribution Distribution::uniform(double lo, double hi) {
  require(finite(lo) && finite(hi) && lo < hi, "uniform requires lo < hi");
  return Distribution(dist::Uniform{lo, hi});
}

Distribution Distribution::discrete(std::vector<dist::Atom> atoms) {
  require(!atoms.empty(), "discrete law needs at least one atom");
  for (const auto& a : atoms) {
    require(finite(a.value), "discrete atom value must be finite");
    require(finite(a.prob) && a.prob > 0, "discrete probabilities must be positive");
  }
  std::sort(atoms.begin(), atoms.end(), [](const auto& a, const auto& b) { return a.value < b.value; });
  dist::Discrete d;
  for (const auto& a : atoms) {
    if (!d.atoms.empty() && d.atoms.back().value == a.value)
      d.atoms.back().prob += a.prob;
    else
      d.atoms.push_back(a);
  }
  double total = 0;
  for (const auto& a : d.atoms) {
    total += a.prob;
    d.cumulative.push_back(total);
  }
  require(std::abs(total - 1.0) <= 1e-12, "discrete probabilities must sum to 1");
  d.cumulative.back() = 1.0;
  return Distribution(std::move(d));
}

Distribution Distribution::lognormal(double mu, double sigma) {
  require(finite(mu), "lognormal mu must be finite");
  require(finite(sigma) && sigma > 0, "lognormal sigma must be positive");
  return Distribution(dist::Lognormal{mu, sigma});
}

Distribution Distribution::pareto(double index, double scale) {
  require(finite(index) && index > 0, "pareto index must be positive");
  require(finite(scale) && scale > 0, "pareto scale must be positive");
  return Distribution(dist::Pareto{index, scale});
}

std::string_view Distribution::name() const noexcept {
  return std::visit(overloaded{[](const dist::Exponential&) { return "exponential"; },
                               [](const dist::Gamma&) { return "gamma"; },
                               [](const dist::Deterministic&) { return "deterministic"; },
                               [](const dist::Uniform&) { return "uniform"; },
                               [](const dist::Discrete&) { return "discrete"; },
                               [](const dist::Lognormal&) { return "lognormal"; },
                               [](const dist::Pareto&) { return "pareto"; }},
                    kind_);
}

double Distribution::sample(Engine& rng) const {
  return std::visit(
      overloaded{
          [&](const dist::Exponential& d) { return std::exponential_distribution<double>(d.rate)(rng); },
          [&](const dist::Gamma& d) { return std::gamma_distribution<double>(d.shape, d.scale)(rng); },
          [&](const dist::Deterministic& d) { return d.value; },
          [&](const dist::Uniform& d) { return std::uniform_real_distribution<double>(d.lo, d.hi)(rng); },
          [&](const dist::Discrete& d) {
            const double u = std::generate_canonical<double, 64>(rng);
            auto it = std::upper_bound(d.cumulative.begin(), d.cumulative.end(), u);
            if (it == d.cumulative.end()) --it;
            return d.atoms[static_cast<std::size_t>(it - d.cumulative.begin())].value;
          },
          [&](const dist::Lognormal& d) { return std::lognormal_distribution<double>(d.mu, d.sigma)(rng); },
          [&](const dist::Pareto& d) {
            const double u = std::generate_canonical<double, 64>(rng);
            return d.scale * std::pow(1.0 - u, -1.0 / d.index);
          }},
      kind_);
}

MgfValue Distribution::mgf(double q) const {
  if (q == 0.0) return 1.0;
  return std::visit(
      overloaded{
          [&](const dist::Exponential& d) -> MgfValue {
            if (q >= d.rate) return MgfValue::infinity();
            return d.rate / (d.rate - q);
          },
          [&](const dist::Gamma& d) -> MgfValue {
            if (q * d.scale >= 1.0) return MgfValue::infinity();
            return std::pow(1.0 - q * d.scale, -d.shape);
          },
          [&](const dist::Deterministic& d) -> MgfValue {
            const double v = std::exp(q * d.value);
            if (!std::isfinite(v)) return MgfValue::infinity();
            return v;
          },
          [&](const dist::Uniform& d) -> MgfValue {
            const double w = q * (d.hi - d.lo);
            const double v = std::exp(q * d.lo) * std::expm1(w) / w;
            if (!std::isfinite(v)) return MgfValue::infinity();
            return v;
          },
          [&](const dist::Discrete& d) -> MgfValue {
            double s = 0;
            for (const auto& a : d.atoms) s += a.prob * std::exp(q * a.value);
            if (!std::isfinite(s)) return MgfValue::infinity();
            return s;
          },
          [&](const auto&) -> MgfValue {
            // Lognormal and Pareto: no exponential moments to the right of 0.
            if (q > 0) return MgfValue::infinity();
            const auto r = expect([q](double x) { return std::exp(q * x); });
            return r.capped ? MgfValue::approx(r.value) : MgfValue(r.value);
          }},
      kind_);
}

MgfEndpoint Distribution::mgf_endpoint() const {
  return std::visit(
      overloaded{[](const dist::Exponential& d) { return MgfEndpoint{d.rate, MgfValue::infinity()}; },
                 [](const dist::Gamma& d) { return MgfEndpoint{1.0 / d.scale, MgfValue::infinity()}; },
                 [](const dist::Lognormal&) { return MgfEndpoint{0.0, 1.0}; },
                 [](const dist::Pareto&) { return MgfEndpoint{0.0, 1.0}; },
                 [](const auto&) { return MgfEndpoint{ExtReal::infinity(), MgfValue::infinity()}; }},
      kind_);
}

ExtReal Distribution::moment(double p) const {
  if (!(p >= 0)) throw ConfigError("moment", "order must be nonnegative");
  if (p == 0.0) return 1.0;
  return std::visit(
      overloaded{
          [&](const dist::Exponential& d) -> ExtReal { return std::tgamma(p + 1.0) / std::pow(d.rate, p); },
          [&](const dist::Gamma& d) -> ExtReal {
            return std::pow(d.scale, p) / boost::math::tgamma_delta_ratio(d.shape, p);
          },
          [&](const dist::Deterministic& d) -> ExtReal { return std::pow(std::abs(d.value), p); },
          [&](const dist::Uniform& d) -> ExtReal { return uniform_abs_moment(d.lo, d.hi, p); },
          [&](const dist::Discrete& d) -> ExtReal {
            double s = 0;
            for (const auto& a : d.atoms) s += a.prob * std::pow(std::abs(a.value), p);
            return s;
          },
          [&](const dist::Lognormal& d) -> ExtReal {
            const double v = std::exp(p * d.mu + 0.5 * p * p * d.sigma * d.sigma);
            if (!std::isfinite(v)) return ExtReal::infinity();
            return v;
          },
          [&](const dist::Pareto& d) -> ExtReal {
            if (p >= d.index) return ExtReal::infinity();
            return d.index * std::pow(d.scale, p) / (d.index - p);
          }},
      kind_);
}

ExtReal Distribution::mean() const {
  return std::visit(overloaded{[](const dist::Deterministic& d) -> ExtReal { return d.value; },
                               [](const dist::Uniform& d) -> ExtReal { return 0.5 * (d.lo + d.hi); },
                               [](const dist::Discrete& d) -> ExtReal {
                                 double s = 0;
                                 for (const auto& a : d.atoms) s += a.prob * a.value;
                                 return s;
                               },
                               [this](const auto&) -> ExtReal { return moment(1.0); }},
                    kind_);
}

double Distribution::cdf(double x) const {
  return std::visit(
      overloaded{
          [&](const dist::Exponential& d) { return x <= 0 ? 0.0 : -std::expm1(-d.rate * x); },
          [&](const dist::Gamma& d) { return x <= 0 ? 0.0 : boost::math::gamma_p(d.shape, x / d.scale); },
          [&](const dist::Deterministic& d) { return x >= d.value ? 1.0 : 0.0; },
          [&](const dist::Uniform& d) { return std::clamp((x - d.lo) / (d.hi - d.lo), 0.0, 1.0); },
          [&](const dist::Discrete& d) {
            double s = 0;
            for (const auto& a : d.atoms) {
              if (a.value > x) break;
              s += a.prob;
            }
            return std::min(s, 1.0);
          },
          [&](const dist::Lognormal& d) {
            if (x <= 0) return 0.0;
            return 0.5 * std::erfc(-(std::log(x) - d.mu) / (d.sigma * std::numbers::sqrt2));
          },
          [&](const dist::Pareto& d) { return x <= d.scale ? 0.0 : 1.0 - std::pow(d.scale / x, d.index); }},
      kind_);
}

Support Distribution::support() const {
  const ExtReal inf = ExtReal::infinity();
  return std::visit(overloaded{[&](const dist::Exponential&) { return Support{0.0, inf}; },
                               [&](const dist::Gamma&) { return Support{0.0, inf}; },
                               [](const dist::Deterministic& d) { return Support{d.value, d.value}; },
                               [](const dist::Uniform& d) { return Support{d.lo, d.hi}; },
                               [](const dist::Discrete& d) {
                                 return Support{d.atoms.front().value, d.atoms.back().value};
                               },
                               [&](const dist::Lognormal&) { return Support{0.0, inf}; },
                               [&](const dist::Pareto& d) { return Support{d.scale, inf}; }},
                    kind_);
}

double Distribution::density(double x) const {
  return std::visit(
      overloaded{
          [&](const dist::Exponential& d) { return x < 0 ? 0.0 : d.rate * std::exp(-d.rate * x); },
          [&](const dist::Gamma& d) {
            return x <= 0 ? 0.0 : boost::math::gamma_p_derivative(d.shape, x / d.scale) / d.scale;
          },
          [&](const dist::Uniform& d) { return (x < d.lo || x > d.hi) ? 0.0 : 1.0 / (d.hi - d.lo); },
          [&](const dist::Lognormal& d) {
            if (x <= 0) return 0.0;
            const double z = (std::log(x) - d.mu) / d.sigma;
            return std::exp(-0.5 * z * z) / (x * d.sigma * std::sqrt(2.0 * std::numbers::pi));
          },
          [&](const dist::Pareto& d) {
            return x < d.scale ? 0.0 : d.index * std::pow(d.scale, d.index) / std::pow(x, d.index + 1.0);
          },
          [](const auto&) -> double { throw NumericalError("density requested for an atomic law"); }},
      kind_);
}

Distribution Distribution::scaled(double k) const {
  if (!(k > 0) || !std::isfinite(k)) throw ConfigError("scale", "scale factor must be positive");
  return std::visit(
      overloaded{[&](const dist::Exponential& d) { return exponential(d.rate / k); },
                 [&](const dist::Gamma& d) { return gamma(d.shape, d.scale * k); },
                 [&](const dist::Deterministic& d) { return deterministic(d.value * k); },
                 [&](const dist::Uniform& d) { return uniform(d.lo * k, d.hi * k); },
                 [&](const dist::Discrete& d) {
                   std::vector<dist::Atom> atoms = d.atoms;
                   for (auto& a : atoms) a.value *= k;
                   return discrete(std::move(atoms));
                 },
                 [&](const dist::Lognormal& d) { return lognormal(d.mu + std::log(k), d.sigma); },
                 [&](const dist::Pareto& d) { return pareto(d.index, d.scale * k); }},
      kind_);
}

numerics::QuadResult Distribution::expect(const std::function<double(double)>& f) const {
  if (const auto* d = std::get_if<dist::Deterministic>(&kind_)) return {f(d->value), 0.0, false};
  if (const auto* d = std::get_if<dist::Discrete>(&kind_)) {
    double s = 0;
    for (const auto& a : d->atoms) s += a.prob * f(a.value);
    return {s, 0.0, false};
  }
  const Support s = support();
  const double hi = s.hi.to_double();
  return numerics::integrate(
      [&](double x) {
        const double w = density(x);
        return w == 0.0 ? 0.0 : f(x) * w;
      },
      s.lo, hi);
}

}  // namespace ruinlab
