#include "ruinlab/lundberg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "ruinlab/error.hpp"
#include "ruinlab/kernels.hpp"
#include "ruinlab/numerics.hpp"
#include "ruinlab/parallel.hpp"
#include "ruinlab/random.hpp"

namespace ruinlab {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTouchRelTol = 1e-12;
constexpr std::size_t kZetaDirect = std::size_t{1} << 17;
constexpr std::size_t kZetaFitTop = std::size_t{1} << 20;
constexpr double kDivergeMargin = 0.05;
constexpr double kConvergeMargin = 0.25;

// Chord geometry of a convex polygon cut by the level lines of t = <u(q), theta>.
struct Chords {
  const std::vector<ThetaPoint>* v;
  std::vector<double> t;
  double u1, u2, norm;

  Chords(const std::vector<ThetaPoint>& vertices, double q) : v(&vertices) {
    std::tie(u1, u2) = u_vector(q);
    norm = std::hypot(u1, u2);
    t.reserve(vertices.size());
    for (const auto& p : vertices) t.push_back(u_dot(q, p));
  }

  double t_min() const { return *std::min_element(t.begin(), t.end()); }
  double t_max() const { return *std::max_element(t.begin(), t.end()); }

  // Length of {theta in polygon : <u, theta> = level}.
  double length(double level) const {
    const auto& vs = *v;
    const std::size_t n = vs.size();
    double lo = kInf, hi = -kInf;
    auto take = [&](double x, double y) {
      const double s = (-u2 * x + u1 * y) / norm;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    };
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t j = (i + 1) % n;
      const double a = t[i] - level, b = t[j] - level;
      if (a == 0.0) take(vs[i].mu, vs[i].half_sigma2);
      if ((a < 0 && b > 0) || (a > 0 && b < 0)) {
        const double s = a / (a - b);
        take(vs[i].mu + s * (vs[j].mu - vs[i].mu),
             vs[i].half_sigma2 + s * (vs[j].half_sigma2 - vs[i].half_sigma2));
      }
    }
    return hi > lo ? hi - lo : 0.0;
  }

  std::vector<double> breakpoints() const {
    std::vector<double> b = t;
    std::sort(b.begin(), b.end());
    b.erase(std::unique(b.begin(), b.end()), b.end());
    return b;
  }

  std::size_t count_at_max() const {
    const double m = t_max();
    const double eps = kTouchRelTol * std::max(1.0, std::abs(m));
    return static_cast<std::size_t>(std::count_if(t.begin(), t.end(), [&](double x) { return m - x <= eps; }));
  }
};

double atom_mass(const Distribution& d, double x) {
  return d.cdf(x) - d.cdf(std::nextafter(x, -kInf));
}

bool atomic(const Distribution& d) {
  return std::holds_alternative<dist::Deterministic>(d.kind()) || std::holds_alternative<dist::Discrete>(d.kind());
}

std::vector<dist::Atom> atoms_of(const Distribution& d) {
  if (const auto* det = std::get_if<dist::Deterministic>(&d.kind())) return {{det->value, 1.0}};
  return std::get<dist::Discrete>(d.kind()).atoms;
}

// Sum of w_j f(j) for j >= j0 over the zeta weights, f bounded with limit f_inf.
double zeta_series(double p, double zeta_p, std::size_t j0, const std::function<double(double)>& f, double f_inf) {
  const std::size_t top = std::max(j0, kZetaDirect);
  double s = 0;
  for (std::size_t j = top; j-- > j0;) s += std::pow(static_cast<double>(j), -p) * f(static_cast<double>(j));
  const double n = static_cast<double>(top);
  s += f_inf * zeta_tail(p, top) + (f(n) - f_inf) * n * zeta_tail(p + 1.0, top);
  return s / zeta_p;
}

struct PowerFit {
  double exponent;
  bool ok;
};

PowerFit fit_power(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0) || !std::isfinite(y[i])) return {0.0, false};
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return {numerics::linear_fit(lx, ly).slope, true};
}

// Divergent iff exponent <= threshold, with an inconclusive band above it.
Verdict band(double exponent, double threshold) {
  if (exponent <= threshold + kDivergeMargin) return Verdict::endpoint_infinite;
  if (exponent >= threshold + kConvergeMargin) return Verdict::endpoint_finite;
  return Verdict::inconclusive;
}

MgfValue phi_polytope(const theta::PolytopeUniform& poly, const Distribution& tau, double q) {
  const Chords ch(poly.vertices, q);
  const MgfEndpoint ep = tau.mgf_endpoint();
  const double t_hi = ch.t_max();
  if (ep.q.is_finite()) {
    const double qt = ep.q.value();
    const double eps = kTouchRelTol * std::max(1.0, std::abs(qt));
    if (t_hi > qt + eps) return MgfValue::infinity();
    if (t_hi >= qt - eps && ep.value_at_endpoint.is_infinite()) {
      const double rho = ch.count_at_max() >= 2 ? 1.0 : 2.0;
      if (rho <= endpoint_exponent(tau)) return MgfValue::infinity();
    }
  }
  const auto bp = ch.breakpoints();
  const double scale = 1.0 / (ch.norm * poly.area);
  const double tol = 1e-13 / scale;
  double total = 0;
  bool capped = false;
  for (std::size_t i = 0; i + 1 < bp.size(); ++i) {
    const auto r = numerics::integrate(
        [&](double t) {
          const MgfValue m = tau.mgf(t);
          return m.is_infinite() ? kInf : m.value() * ch.length(t);
        },
        bp[i], bp[i + 1], tol);
    total += r.value;
    capped = capped || r.capped || !std::isfinite(r.value);
  }
  if (!std::isfinite(total)) return MgfValue::infinity();
  return capped ? MgfValue::approx(total * scale) : MgfValue(total * scale);
}

MgfValue phi_finite(const std::vector<ThetaPoint>& pts, const std::vector<double>& probs, const Distribution& tau,
                    double q) {
  MgfValue s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) s = s + MgfValue(probs[i]) * tau.mgf(u_dot(q, pts[i]));
  return s;
}

MgfValue phi_product(const theta::Product& pr, const Distribution& tau, double q) {
  if (atomic(pr.mu) && atomic(pr.half_sigma2)) {
    std::vector<ThetaPoint> pts;
    std::vector<double> probs;
    for (const auto& a : atoms_of(pr.mu))
      for (const auto& b : atoms_of(pr.half_sigma2)) {
        pts.push_back({a.value, b.value});
        probs.push_back(a.prob * b.prob);
      }
    return phi_finite(pts, probs, tau, q);
  }
  if (const auto* det = std::get_if<dist::Deterministic>(&tau.kind())) {
    const double d = det->value;
    return pr.mu.mgf(-q * d) * pr.half_sigma2.mgf(q * (q + 1) * d);
  }
  const MgfEndpoint ep = tau.mgf_endpoint();
  const Support sm = pr.mu.support();
  const Support ss = pr.half_sigma2.support();
  if (ep.q.is_finite()) {
    if (ss.hi.is_infinite()) return MgfValue::infinity();
    const double sup = -q * sm.lo + q * (q + 1) * ss.hi.value();
    const double qt = ep.q.value();
    if (sup > qt + kTouchRelTol * std::max(1.0, std::abs(qt))) return MgfValue::infinity();
  }
  bool capped = false;
  const auto outer = pr.half_sigma2.expect([&](double s) {
    const auto inner = pr.mu.expect([&](double m) {
      const MgfValue v = tau.mgf(-q * m + q * (q + 1) * s);
      return v.is_infinite() ? kInf : v.value();
    });
    capped = capped || inner.capped;
    return inner.value;
  });
  if (!std::isfinite(outer.value)) return MgfValue::infinity();
  return (capped || outer.capped) ? MgfValue::approx(outer.value) : MgfValue(outer.value);
}

MgfValue phi_zeta(const theta::ZetaFamily& z, const Distribution& tau, double q) {
  const double a = q * (q + 1);
  const double b = q * (q + 2);
  const MgfEndpoint ep = tau.mgf_endpoint();
  auto f = [&](double j) {
    const MgfValue v = tau.mgf(a - b / j);
    return v.is_infinite() ? kInf : v.value();
  };
  if (ep.q.is_finite()) {
    const double qt = ep.q.value();
    const double eps = kTouchRelTol * std::max(1.0, std::abs(qt));
    if (a > qt + eps) return MgfValue::infinity();
    if (a >= qt - eps) {
      if (ep.value_at_endpoint.is_infinite()) {
        // Terms decay like j^{kappa - p}.
        const double kappa = endpoint_exponent(tau);
        if (z.p - kappa <= 1.0) return MgfValue::infinity();
        auto g = [&](double j) { return mgf_below_endpoint(tau, b / j); };
        double s = 0;
        for (std::size_t j = kZetaFitTop; j-- > 1;) s += std::pow(static_cast<double>(j), -z.p) * g(static_cast<double>(j));
        const double n = static_cast<double>(kZetaFitTop);
        const double last = std::pow(n, -z.p) * g(n);
        s += last * n / (z.p - kappa - 1.0);
        return MgfValue::approx(s / z.zeta_p);
      }
      const double f_inf = ep.value_at_endpoint.value();
      return zeta_series(z.p, z.zeta_p, 1, f, f_inf);
    }
  }
  const MgfValue lim = tau.mgf(a);
  if (lim.is_infinite()) return MgfValue::infinity();
  return zeta_series(z.p, z.zeta_p, 1, f, lim.value());
}

}  // namespace

std::pair<double, double> u_vector(double q) { return {-q, q * (q + 1)}; }

double u_dot(double q, const ThetaPoint& th) { return -q * th.mu + q * (q + 1) * th.half_sigma2; }

ExtReal touch_value(const ThetaPoint& th, double q_tau) {
  const double x = th.mu, y = th.half_sigma2;
  if (y > 0) {
    const double d = x - y;
    const double disc = std::sqrt(d * d + 4.0 * y * q_tau);
    if (d > 0) return (d + disc) / (2.0 * y);
    return 2.0 * q_tau / (disc - d);
  }
  if (x < 0) return -q_tau / x;
  return ExtReal::infinity();
}

double mgf_below_endpoint(const Distribution& tau, double h) {
  if (const auto* e = std::get_if<dist::Exponential>(&tau.kind())) return e->rate / h;
  if (const auto* g = std::get_if<dist::Gamma>(&tau.kind())) return std::pow(h * g->scale, -g->shape);
  const MgfEndpoint ep = tau.mgf_endpoint();
  const MgfValue v = tau.mgf(ep.q.value() - h);
  return v.to_double();
}

double endpoint_exponent(const Distribution& tau) {
  if (std::holds_alternative<dist::Exponential>(tau.kind())) return 1.0;
  if (const auto* g = std::get_if<dist::Gamma>(&tau.kind())) return g->shape;
  return tau.mgf_endpoint().value_at_endpoint.is_infinite() ? 1.0 : 0.0;
}

double TangentGeometry::h(const ThetaPoint& th) const {
  return q_tau + q_plus * th.mu - q_plus * (q_plus + 1) * th.half_sigma2;
}

double TangentGeometry::h_cdf(double x) const {
  if (x < 0) return 0.0;
  const double q = q_plus;
  return std::visit(
      overloaded{[&](const theta::Finite& f) {
                   double s = 0;
                   for (std::size_t i = 0; i < f.points.size(); ++i)
                     if (h(f.points[i]) <= x) s += f.probs[i];
                   return std::min(s, 1.0);
                 },
                 [&](const theta::PolytopeUniform& poly) {
                   const Chords ch(poly.vertices, q);
                   const double level = q_tau - x;
                   const double t_hi = ch.t_max();
                   if (level >= t_hi) return 0.0;
                   auto bp = ch.breakpoints();
                   double s = 0;
                   double prev = std::max(level, bp.front());
                   double l_prev = ch.length(prev);
                   for (double b : bp) {
                     if (b <= prev) continue;
                     const double l_b = ch.length(b);
                     s += 0.5 * (l_prev + l_b) * (b - prev);
                     prev = b;
                     l_prev = l_b;
                   }
                   return std::min(1.0, s / (ch.norm * poly.area));
                 },
                 [&](const theta::Product& pr) {
                   return pr.half_sigma2
                       .expect([&](double s) { return pr.mu.cdf((q * (q + 1) * s - q_tau + x) / q); })
                       .value;
                 },
                 [&](const theta::ZetaFamily& z) {
                   const double h_inf = q_tau - q * (q + 1);
                   const double c = q * (q + 2);
                   if (x < h_inf) return 0.0;
                   if (x - h_inf <= 0) return 0.0;
                   // h_j <= x  iff  j >= c / (x - h_inf)
                   const double jmin = std::ceil(c / (x - h_inf));
                   if (jmin <= 1) return 1.0;
                   return zeta_tail(z.p, static_cast<std::size_t>(jmin)) / z.zeta_p;
                 }},
      theta.kind());
}

double TangentGeometry::h_mass_at_zero() const {
  const double eps = kTouchRelTol * std::max(1.0, q_tau);
  return std::visit(overloaded{[&](const theta::Finite& f) {
                                 double s = 0;
                                 for (std::size_t i = 0; i < f.points.size(); ++i)
                                   if (std::abs(h(f.points[i])) <= eps) s += f.probs[i];
                                 return s;
                               },
                               [](const theta::PolytopeUniform&) { return 0.0; },
                               [&](const theta::Product& pr) {
                                 const Support sm = pr.mu.support();
                                 const Support ss = pr.half_sigma2.support();
                                 if (ss.hi.is_infinite()) return 0.0;
                                 if (std::abs(h({sm.lo, ss.hi.value()})) > eps) return 0.0;
                                 return atom_mass(pr.mu, sm.lo) * atom_mass(pr.half_sigma2, ss.hi.value());
                               },
                               [&](const theta::ZetaFamily& z) {
                                 double s = 0;
                                 for (std::size_t j = 1; j <= 64; ++j)
                                   if (std::abs(h({1.0 / j, 1.0 - 1.0 / j})) <= eps)
                                     s += std::pow(static_cast<double>(j), -z.p) / z.zeta_p;
                                 return s;
                               }},
                    theta.kind());
}

TangentGeometry q_plus_compute(const ThetaLaw& theta, double q_tau) {
  if (!std::isfinite(q_tau) || !(q_tau > 0))
    throw HypothesisViolation("tau_infi", "tangent geometry needs a finite positive MGF endpoint q_tau");
  const auto pts = theta.extreme_points();
  ExtReal best = ExtReal::infinity();
  std::vector<ExtReal> tv;
  tv.reserve(pts.size());
  for (const auto& p : pts) {
    tv.push_back(touch_value(p, q_tau));
    if (tv.back() < best) best = tv.back();
  }
  if (best.is_infinite()) throw NumericalError("no support point can touch L_q: q_plus is infinite");
  TangentGeometry g{best.value(), q_tau, {}, theta};
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (tv[i].is_finite() && tv[i].value() - g.q_plus <= kTouchRelTol * g.q_plus) g.touching_points.push_back(pts[i]);
  return g;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::endpoint_infinite:
      return "endpoint_infinite";
    case Verdict::endpoint_finite:
      return "endpoint_finite";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Theorem2Result theorem2_classify(const TangentGeometry& g, const Distribution& tau, double delta) {
  if (!(delta > 0)) throw ConfigError("delta", "must be positive");
  const MgfEndpoint ep = tau.mgf_endpoint();
  if (ep.q.is_infinite()) throw HypothesisViolation("tau_infi", "classification needs q_tau < infinity");
  Theorem2Result res;
  res.kappa = endpoint_exponent(tau);
  const double qt = g.q_tau;
  const bool endpoint_infinite = ep.value_at_endpoint.is_infinite();

  const double mass0 = g.h_mass_at_zero();
  if (mass0 > 0 && endpoint_infinite) {
    res.verdict = Verdict::endpoint_infinite;
    res.integral_value = ExtReal::infinity();
    return res;
  }
  auto phi_at = [&](double h) { return h <= 0 ? ep.value_at_endpoint.to_double() : mgf_below_endpoint(tau, h); };

  return std::visit(
      overloaded{
          [&](const theta::Finite& f) {
            double s = 0;
            for (std::size_t i = 0; i < f.points.size(); ++i) {
              const double h = g.h(f.points[i]);
              if (h <= delta) s += f.probs[i] * phi_at(std::max(h, 0.0));
            }
            res.verdict = Verdict::endpoint_finite;
            res.integral_value = s;
            return res;
          },
          [&](const theta::ZetaFamily& z) {
            const double q = g.q_plus;
            double h_inf = qt - q * (q + 1);
            if (std::abs(h_inf) <= kTouchRelTol * std::max(1.0, qt)) h_inf = 0.0;
            const double c = q * (q + 2);
            auto h_of = [&](double j) { return h_inf + c / j; };
            const std::size_t j0 =
                h_inf >= delta ? 0 : static_cast<std::size_t>(std::max(1.0, std::ceil(c / (delta - h_inf))));
            if (j0 == 0) {
              res.verdict = Verdict::endpoint_finite;
              res.integral_value = 0.0;
              return res;
            }
            if (h_inf > 0 || !endpoint_infinite) {
              const double f_inf = phi_at(h_inf);
              res.verdict = Verdict::endpoint_finite;
              res.integral_value =
                  zeta_series(z.p, z.zeta_p, j0, [&](double j) { return phi_at(h_of(j)); }, f_inf);
              return res;
            }
            std::vector<double> js, terms;
            for (std::size_t j = kZetaFitTop / 64; j <= kZetaFitTop; j *= 2) {
              const double jd = static_cast<double>(j);
              js.push_back(jd);
              terms.push_back(std::pow(jd, -z.p) * phi_at(h_of(jd)));
            }
            const PowerFit fit = fit_power(js, terms);
            const double s = -fit.exponent;
            res.fitted_exponent = s;
            res.verdict = band(s, 1.0);
            if (res.verdict == Verdict::endpoint_infinite) {
              res.integral_value = ExtReal::infinity();
            } else if (res.verdict == Verdict::endpoint_finite) {
              double sum = 0;
              for (std::size_t j = kZetaFitTop; j-- > j0;)
                sum += std::pow(static_cast<double>(j), -z.p) * phi_at(h_of(static_cast<double>(j)));
              sum += terms.back() * static_cast<double>(kZetaFitTop) / (s - 1.0);
              res.integral_value = ExtReal::approx(sum / z.zeta_p);
            }
            return res;
          },
          [&](const auto& kind) {
            res.heuristic = true;
            if (!endpoint_infinite) {
              res.verdict = Verdict::endpoint_finite;
            } else {
              std::vector<double> hs, fs;
              for (int k = 6; k >= 0; --k) {
                hs.push_back(delta / std::ldexp(1.0, k));
                fs.push_back(g.h_cdf(hs.back()) - mass0);
              }
              if (fs.back() <= 0 || fs.front() <= 0) {
                res.verdict = Verdict::endpoint_finite;
                if (fs.back() <= 0) res.integral_value = 0.0;
                return res;
              }
              const PowerFit fit = fit_power(hs, fs);
              res.fitted_exponent = fit.exponent;
              res.verdict = band(fit.exponent, res.kappa);
            }
            if (res.verdict == Verdict::endpoint_infinite) {
              res.integral_value = ExtReal::infinity();
            } else if (res.verdict == Verdict::endpoint_finite) {
              if constexpr (std::is_same_v<std::decay_t<decltype(kind)>, theta::PolytopeUniform>) {
                const Chords ch(kind.vertices, g.q_plus);
                const double scale = 1.0 / (ch.norm * kind.area);
                const auto r = numerics::integrate(
                    [&](double h) { return phi_at(h) * ch.length(qt - h); }, 0.0, delta, 1e-12 / scale);
                res.integral_value = r.capped ? ExtReal::approx(r.value * scale) : ExtReal(r.value * scale);
              }
            }
            return res;
          }},
      g.theta.kind());
}

MgfValue phi_nu_analytic(const ThetaLaw& theta, const Distribution& tau, double q) {
  if (q == 0.0) return 1.0;
  return std::visit(overloaded{[&](const theta::Finite& f) { return phi_finite(f.points, f.probs, tau, q); },
                               [&](const theta::PolytopeUniform& p) { return phi_polytope(p, tau, q); },
                               [&](const theta::Product& p) { return phi_product(p, tau, q); },
                               [&](const theta::ZetaFamily& z) { return phi_zeta(z, tau, q); }},
                    theta.kind());
}

double NuSample::mean() const {
  double s = 0;
  for (double x : nu) s += x;
  return nu.empty() ? 0.0 : s / static_cast<double>(nu.size());
}

NuSample sample_nu(const ModelConfig& config, std::size_t n, std::uint64_t seed, std::size_t workers) {
  config.validate();
  NuSample out;
  out.nu.assign(n, 0.0);
  if (!config.investment()) return out;
  chunked_reduce<int>(
      n, kDefaultChunk, workers, 0,
      [&](int&, std::size_t begin, std::size_t end) {
        RegimeDraw d;
        for (std::size_t i = begin; i < end; ++i) {
          StreamSet streams(seed, i);
          if (config.constant_coefficients()) {
            out.nu[i] = draw_nu_constant(config, streams).nu();
            continue;
          }
          draw_regime(config, streams, d);
          double k = 0, z = 0;
          for (std::size_t c = 0; c < d.cells(); ++c) {
            const double s = d.sigma_path[c];
            k += (d.mu_path[c] - 0.5 * s * s) * d.cell_width(c);
            z += s * d.wiener_increments[c];
          }
          out.nu[i] = -(k + z);
        }
      },
      [](int&, const int&) {});
  return out;
}

PhiEstimate phi_nu_mc(const NuSample& sample, double q) {
  if (!(q >= 0)) throw ConfigError("q", "must be nonnegative");
  const std::size_t n = sample.nu.size();
  if (n < 2) throw ConfigError("n", "need at least two samples");
  if (q == 0.0) return {1.0, 0.0, false, 10.0 / static_cast<double>(n)};
  const auto sums = kernels::active().exp_sums(sample.nu, q);
  const double nd = static_cast<double>(n);
  PhiEstimate est;
  est.estimate = sums.sum / nd;
  if (!std::isfinite(sums.sum) || !std::isfinite(sums.sum_sq)) {
    est.estimate = std::isfinite(sums.sum) ? est.estimate : kInf;
    est.std_error = kInf;
    est.stability_flag = true;
    est.top10_share = 1.0;
    return est;
  }
  double var = std::max(0.0, (sums.sum_sq / nd - est.estimate * est.estimate) * nd / (nd - 1.0));
  if (var < 1e-8 * est.estimate * est.estimate) {
    // Raw second moment cancels for small q; recompute on expm1 with two passes.
    double mean = 0;
    for (double v : sample.nu) mean += std::expm1(q * v);
    mean /= nd;
    double ss = 0;
    for (double v : sample.nu) {
      const double d = std::expm1(q * v) - mean;
      ss += d * d;
    }
    var = ss / (nd - 1.0);
  }
  est.std_error = std::sqrt(var / nd);
  std::array<double, 10> top{};
  const std::size_t k = std::min<std::size_t>(10, n);
  std::partial_sort_copy(sample.nu.begin(), sample.nu.end(), top.begin(), top.begin() + k, std::greater<>());
  double top_sum = 0;
  for (std::size_t i = 0; i < k; ++i) top_sum += std::exp(q * top[i]);
  est.top10_share = top_sum / sums.sum;
  est.stability_flag = est.top10_share > 0.5;
  return est;
}

PhiEstimate phi_nu_mc(const ModelConfig& config, double q, std::size_t n, std::uint64_t seed, std::size_t workers) {
  return phi_nu_mc(sample_nu(config, n, seed, workers), q);
}

BetaSolution solve_beta(const PhiEvaluator& phi, ExtReal q_upper, double tol, std::optional<MgfValue> phi_at_upper) {
  if (!(tol > 0)) throw ConfigError("tol", "must be positive");
  BetaSolution sol;
  auto eval = [&](double q) {
    ++sol.evaluations;
    return phi(q);
  };
  auto at_least_one = [](const MgfValue& v) { return v.is_infinite() || v.value() >= 1.0; };

  double lo = tol;
  if (q_upper.is_finite() && lo >= q_upper.value()) throw NumericalError("q_upper below tolerance");
  if (at_least_one(eval(lo)))
    throw NumericalError("phi_nu is not below 1 to the right of 0: E nu is not negative");

  double hi = 0;
  bool bracketed = false;
  for (int it = 0; it < 2100 && !bracketed; ++it) {
    const double q = 2.0 * lo;
    if (q_upper.is_finite() && q >= q_upper.value()) {
      const double qu = q_upper.value();
      if (phi_at_upper) {
        if (!at_least_one(*phi_at_upper) || phi_at_upper->value() == 1.0)
          throw NumericalError("no root: phi_nu < 1 on (0, q_nu) and phi_nu(q_nu) <= 1");
        hi = qu;
        bracketed = true;
        break;
      }
      for (int k = 1; k <= 52; ++k) {
        const double qk = qu - (qu - lo) * std::ldexp(1.0, -k);
        if (qk <= lo) continue;
        if (at_least_one(eval(qk))) {
          hi = qk;
          bracketed = true;
          break;
        }
        lo = qk;
      }
      if (!bracketed) throw NumericalError("no root found below q_nu");
      break;
    }
    if (!std::isfinite(q) || q > 1e300) throw NumericalError("no root: phi_nu stays below 1");
    if (at_least_one(eval(q))) {
      hi = q;
      bracketed = true;
    } else {
      lo = q;
    }
  }
  if (!bracketed) throw NumericalError("no root: phi_nu stays below 1");

  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const MgfValue v = eval(mid);
    if (at_least_one(v))
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= tol && v.is_finite() && std::abs(v.value() - 1.0) <= tol) break;
  }
  sol.q_lo = lo;
  sol.q_hi = hi;
  sol.beta = 0.5 * (lo + hi);
  return sol;
}

bool cond_tau_holds(const ModelConfig& config, double beta) {
  const MgfEndpoint ep = config.interarrival.mgf_endpoint();
  if (ep.q.is_infinite()) return true;
  const double s2 = 0.5 * config.sigma_upper * config.sigma_upper;
  return ep.q.value() > beta * beta * s2 + beta * std::max(0.0, s2 - config.mu_lower);
}

LundbergReport lundberg_report(const ModelConfig& config, const LundbergOptions& opt) {
  config.validate();
  LundbergReport rep;
  const bool constant = config.constant_coefficients();
  rep.flags.ek_positive = config.ek_positive();
  if (!rep.flags.ek_positive) {
    if (constant) throw HypothesisViolation("mu_si_0", "E(mu - sigma^2/2) must be positive");
    throw HypothesisViolation("EK_positive", "E K = E int_0^tau (mu - sigma^2/2) du must be positive");
  }
  const MgfEndpoint ep = config.interarrival.mgf_endpoint();
  rep.flags.tau_infi = ep.q.is_finite() && ep.value_at_endpoint.is_infinite();

  std::optional<MgfValue> phi_upper;
  ExtReal q_upper = ExtReal::infinity();
  if (constant) {
    const ThetaLaw& th = *config.theta();
    if (ep.q.is_finite()) {
      rep.geometry = q_plus_compute(th, ep.q.value());
      rep.q_nu = ExtReal(rep.geometry->q_plus);
      q_upper = rep.geometry->q_plus;
      rep.theorem2 = theorem2_classify(*rep.geometry, config.interarrival, opt.classify_delta);
      if (rep.theorem2->verdict == Verdict::endpoint_infinite) {
        phi_upper = MgfValue::infinity();
      } else if (rep.theorem2->verdict == Verdict::endpoint_finite) {
        phi_upper = phi_nu_analytic(th, config.interarrival, rep.geometry->q_plus);
      }
      if (rep.theorem2->heuristic) rep.warnings.push_back("theorem2 verdict from the power-fit heuristic");
      rep.phi_at_endpoint = phi_upper;
    } else {
      rep.q_nu = ExtReal::infinity();
    }
  }

  if (constant && !opt.force_monte_carlo) {
    rep.method = Method::analytic;
    const ThetaLaw& th = *config.theta();
    bool approx = false;
    auto phi = [&](double q) {
      const MgfValue v = phi_nu_analytic(th, config.interarrival, q);
      approx = approx || v.approximate();
      return v;
    };
    try {
      rep.beta = solve_beta(phi, q_upper, opt.tol, phi_upper).beta;
    } catch (const NumericalError& e) {
      rep.warnings.push_back(std::string("no Lundberg exponent: ") + e.what());
    }
    if (approx) rep.warnings.push_back("phi_nu evaluated by quadrature that reached its node cap");
  } else {
    rep.method = Method::monte_carlo;
    const NuSample sample = sample_nu(config, opt.mc_samples, opt.seed, opt.workers);
    auto curve = [&](double k) {
      return [&sample, k](double q) {
        const PhiEstimate e = phi_nu_mc(sample, q);
        const double v = e.estimate + k * e.std_error;
        return std::isfinite(v) ? MgfValue(v) : MgfValue::infinity();
      };
    };
    try {
      rep.beta = solve_beta(curve(0.0), q_upper, opt.tol).beta;
      rep.stability_flag = phi_nu_mc(sample, *rep.beta).stability_flag;
      double lo = *rep.beta, hi = *rep.beta;
      try {
        lo = solve_beta(curve(2.0), q_upper, opt.tol).beta;
      } catch (const NumericalError&) {
        lo = 0.0;
      }
      try {
        hi = solve_beta(curve(-2.0), q_upper, opt.tol).beta;
      } catch (const NumericalError&) {
        hi = kInf;
      }
      rep.ci_halfwidth = std::max(*rep.beta - lo, hi - *rep.beta);
    } catch (const NumericalError& e) {
      rep.warnings.push_back(std::string("no Lundberg exponent: ") + e.what());
    }
    if (rep.stability_flag) rep.warnings.push_back("phi_nu estimate at beta dominated by its top order statistics");
  }

  if (rep.beta) {
    const ExtReal m = config.claim.moment(*rep.beta * (1.0 + 1e-6));
    rep.flags.claim_moment_ok = m.is_finite();
    rep.flags.cond_tau_ok = cond_tau_holds(config, *rep.beta);
  }
  return rep;
}

}  // namespace ruinlab
