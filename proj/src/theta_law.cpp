#include "ruinlab/theta_law.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/zeta.hpp>

#include "ruinlab/error.hpp"

namespace ruinlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double cross(const ThetaPoint& o, const ThetaPoint& a, const ThetaPoint& b) {
  return (a.mu - o.mu) * (b.half_sigma2 - o.half_sigma2) - (a.half_sigma2 - o.half_sigma2) * (b.mu - o.mu);
}

}  // namespace

double ThetaPoint::sigma() const { return std::sqrt(2.0 * half_sigma2); }

double zeta_tail(double p, std::size_t j0) {
  if (j0 < 1) j0 = 1;
  constexpr std::size_t kDirect = 16;
  double s = 0;
  for (std::size_t j = j0; j < j0 + kDirect; ++j) s += std::pow(static_cast<double>(j), -p);
  const double n = static_cast<double>(j0 + kDirect);
  s += std::pow(n, 1.0 - p) / (p - 1.0) + 0.5 * std::pow(n, -p) + p / 12.0 * std::pow(n, -p - 1.0) -
       p * (p + 1.0) * (p + 2.0) / 720.0 * std::pow(n, -p - 3.0);
  return s;
}

ThetaLaw ThetaLaw::finite(std::vector<ThetaPoint> points, std::vector<double> probs) {
  if (points.empty() || points.size() != probs.size())
    throw ConfigError("theta", "finite law needs matching, non-empty points and probabilities");
  theta::Finite f;
  double total = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(probs[i] > 0)) throw ConfigError("theta", "probabilities must be positive");
    if (!std::isfinite(points[i].mu) || !std::isfinite(points[i].half_sigma2) || points[i].half_sigma2 < 0)
      throw ConfigError("theta", "atoms need finite mu and nonnegative sigma^2/2");
    total += probs[i];
    f.cumulative.push_back(total);
  }
  if (std::abs(total - 1.0) > 1e-12) throw ConfigError("theta", "probabilities must sum to 1");
  f.cumulative.back() = 1.0;
  f.points = std::move(points);
  f.probs = std::move(probs);
  return ThetaLaw(std::move(f));
}

ThetaLaw ThetaLaw::point_mass(ThetaPoint point) { return finite({point}, {1.0}); }

ThetaLaw ThetaLaw::polytope_uniform(std::vector<ThetaPoint> vertices) {
  if (vertices.size() < 3) throw ConfigError("theta", "polytope needs at least three vertices");
  ThetaPoint c{};
  for (const auto& v : vertices) {
    c.mu += v.mu / static_cast<double>(vertices.size());
    c.half_sigma2 += v.half_sigma2 / static_cast<double>(vertices.size());
  }
  std::sort(vertices.begin(), vertices.end(), [&](const ThetaPoint& a, const ThetaPoint& b) {
    return std::atan2(a.half_sigma2 - c.half_sigma2, a.mu - c.mu) <
           std::atan2(b.half_sigma2 - c.half_sigma2, b.mu - c.mu);
  });
  const std::size_t n = vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]) <= 0)
      throw ConfigError("theta", "polytope vertices must form a strictly convex polygon");
    if (vertices[i].half_sigma2 < 0) throw ConfigError("theta", "polytope must lie in sigma^2/2 >= 0");
  }
  theta::PolytopeUniform poly;
  double total = 0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    total += 0.5 * cross(vertices[0], vertices[i], vertices[i + 1]);
    poly.fan_cumulative.push_back(total);
  }
  for (auto& w : poly.fan_cumulative) w /= total;
  poly.fan_cumulative.back() = 1.0;
  poly.area = total;
  poly.vertices = std::move(vertices);
  return ThetaLaw(std::move(poly));
}

ThetaLaw ThetaLaw::product(Distribution mu, Distribution half_sigma2) {
  if (half_sigma2.support().lo < 0) throw ConfigError("theta", "sigma^2/2 component must be nonnegative");
  return ThetaLaw(theta::Product{std::move(mu), std::move(half_sigma2)});
}

ThetaLaw ThetaLaw::zeta_family(double p) {
  if (!(p > 1.0) || !std::isfinite(p)) throw ConfigError("theta", "zeta family needs p > 1");
  return ThetaLaw(theta::ZetaFamily{p, boost::math::zeta(p)});
}

double ThetaLaw::zeta_weight(std::size_t j) const {
  const auto* z = std::get_if<theta::ZetaFamily>(&kind_);
  if (z == nullptr || j == 0) return 0.0;
  return std::pow(static_cast<double>(j), -z->p) / z->zeta_p;
}

ThetaPoint ThetaLaw::sample(Engine& rng) const {
  return std::visit(
      overloaded{
          [&](const theta::Finite& f) {
            const double u = std::generate_canonical<double, 64>(rng);
            auto it = std::upper_bound(f.cumulative.begin(), f.cumulative.end(), u);
            if (it == f.cumulative.end()) --it;
            return f.points[static_cast<std::size_t>(it - f.cumulative.begin())];
          },
          [&](const theta::PolytopeUniform& p) {
            const double u = std::generate_canonical<double, 64>(rng);
            auto it = std::upper_bound(p.fan_cumulative.begin(), p.fan_cumulative.end(), u);
            if (it == p.fan_cumulative.end()) --it;
            const std::size_t i = static_cast<std::size_t>(it - p.fan_cumulative.begin()) + 1;
            double r1 = std::generate_canonical<double, 64>(rng);
            double r2 = std::generate_canonical<double, 64>(rng);
            if (r1 + r2 > 1.0) {
              r1 = 1.0 - r1;
              r2 = 1.0 - r2;
            }
            const ThetaPoint& a = p.vertices[0];
            const ThetaPoint& b = p.vertices[i];
            const ThetaPoint& c = p.vertices[i + 1];
            return ThetaPoint{a.mu + r1 * (b.mu - a.mu) + r2 * (c.mu - a.mu),
                              a.half_sigma2 + r1 * (b.half_sigma2 - a.half_sigma2) +
                                  r2 * (c.half_sigma2 - a.half_sigma2)};
          },
          [&](const theta::Product& p) {
            const double mu = p.mu.sample(rng);
            return ThetaPoint{mu, p.half_sigma2.sample(rng)};
          },
          [&](const theta::ZetaFamily& z) {
            // Devroye's rejection sampler for the zeta (Zipf) law.
            const double am1 = z.p - 1.0;
            const double b = std::pow(2.0, am1);
            for (;;) {
              const double u = 1.0 - std::generate_canonical<double, 64>(rng);
              const double v = std::generate_canonical<double, 64>(rng);
              const double x = std::floor(std::pow(u, -1.0 / am1));
              if (!(x < 1e15)) continue;
              const double t = std::pow(1.0 + 1.0 / x, am1);
              if (v * x * (t - 1.0) / (b - 1.0) <= t / b) return ThetaPoint{1.0 / x, 1.0 - 1.0 / x};
            }
          }},
      kind_);
}

double ThetaLaw::mean_drift() const {
  return std::visit(overloaded{[](const theta::Finite& f) {
                                 double s = 0;
                                 for (std::size_t i = 0; i < f.points.size(); ++i)
                                   s += f.probs[i] * (f.points[i].mu - f.points[i].half_sigma2);
                                 return s;
                               },
                               [](const theta::PolytopeUniform& p) {
                                 // Centroid of the fan triangles weighted by area.
                                 double cx = 0, cy = 0, prev = 0;
                                 for (std::size_t i = 1; i + 1 < p.vertices.size(); ++i) {
                                   const double w = p.fan_cumulative[i - 1] - prev;
                                   prev = p.fan_cumulative[i - 1];
                                   cx += w * (p.vertices[0].mu + p.vertices[i].mu + p.vertices[i + 1].mu) / 3.0;
                                   cy += w *
                                         (p.vertices[0].half_sigma2 + p.vertices[i].half_sigma2 +
                                          p.vertices[i + 1].half_sigma2) /
                                         3.0;
                                 }
                                 return cx - cy;
                               },
                               [](const theta::Product& p) {
                                 return p.mu.mean().value() - p.half_sigma2.mean().value();
                               },
                               [](const theta::ZetaFamily& z) {
                                 return 2.0 * boost::math::zeta(z.p + 1.0) / z.zeta_p - 1.0;
                               }},
                    kind_);
}

ThetaBox ThetaLaw::bounding_box() const {
  return std::visit(overloaded{[](const theta::Finite& f) {
                                 ThetaBox b{f.points[0].mu, f.points[0].mu, f.points[0].half_sigma2,
                                            f.points[0].half_sigma2};
                                 for (const auto& p : f.points) {
                                   b.mu_lo = std::min(b.mu_lo, p.mu);
                                   b.mu_hi = std::max(b.mu_hi.value(), p.mu);
                                   b.half_sigma2_lo = std::min(b.half_sigma2_lo, p.half_sigma2);
                                   b.half_sigma2_hi = std::max(b.half_sigma2_hi.value(), p.half_sigma2);
                                 }
                                 return b;
                               },
                               [](const theta::PolytopeUniform& poly) {
                                 const auto& v = poly.vertices;
                                 ThetaBox b{v[0].mu, v[0].mu, v[0].half_sigma2, v[0].half_sigma2};
                                 for (const auto& p : v) {
                                   b.mu_lo = std::min(b.mu_lo, p.mu);
                                   b.mu_hi = std::max(b.mu_hi.value(), p.mu);
                                   b.half_sigma2_lo = std::min(b.half_sigma2_lo, p.half_sigma2);
                                   b.half_sigma2_hi = std::max(b.half_sigma2_hi.value(), p.half_sigma2);
                                 }
                                 return b;
                               },
                               [](const theta::Product& p) {
                                 const Support m = p.mu.support();
                                 const Support s = p.half_sigma2.support();
                                 return ThetaBox{m.lo, m.hi, s.lo, s.hi};
                               },
                               [](const theta::ZetaFamily&) { return ThetaBox{0.0, 1.0, 0.0, 1.0}; }},
                    kind_);
}

std::vector<ThetaPoint> ThetaLaw::extreme_points() const {
  return std::visit(overloaded{[](const theta::Finite& f) { return f.points; },
                               [](const theta::PolytopeUniform& p) { return p.vertices; },
                               [](const theta::Product& p) {
                                 const Support m = p.mu.support();
                                 const Support s = p.half_sigma2.support();
                                 if (s.hi.is_infinite())
                                   throw ConfigError("theta",
                                                     "unbounded support: sigma^2/2 component is unbounded above");
                                 std::vector<ThetaPoint> pts{{m.lo, s.lo}, {m.lo, s.hi.value()}};
                                 if (m.hi.is_finite()) {
                                   pts.push_back({m.hi.value(), s.lo});
                                   pts.push_back({m.hi.value(), s.hi.value()});
                                 }
                                 return pts;
                               },
                               [](const theta::ZetaFamily&) {
                                 std::vector<ThetaPoint> pts{{0.0, 1.0}};
                                 for (int j = 1; j <= 64; ++j) pts.push_back({1.0 / j, 1.0 - 1.0 / j});
                                 return pts;
                               }},
                    kind_);
}

}  // namespace ruinlab
