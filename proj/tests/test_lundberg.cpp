#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ruinlab/acceptance.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/lundberg.hpp"

using namespace ruinlab;

namespace {

const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

ThetaLaw unit_square() { return ThetaLaw::polytope_uniform({{0, 0}, {1, 0}, {0, 1}, {1, 1}}); }

double max_dot(const ThetaLaw& th, double q) {
  double m = -INFINITY;
  for (const auto& p : th.extreme_points()) m = std::max(m, u_dot(q, p));
  return m;
}

ModelConfig zeta_config(double p) {
  ModelConfig c = acceptance::beta2_config();
  c.regime = regime::Constant{ThetaLaw::zeta_family(p)};
  c.mu_lower = 0.0;
  c.sigma_upper = 1.5;
  return c;
}

}  // namespace

TEST_CASE("u vector and touch value") {
  const auto [a, b] = u_vector(2.0);
  CHECK(a == -2.0);
  CHECK(b == 6.0);
  CHECK(u_dot(1.0, {0.5, 0.25}) == doctest::Approx(0.0));
  CHECK(touch_value({0.0, 1.0}, 1.0).value() == doctest::Approx(kGolden).epsilon(1e-15));
  // Points on or below the ray half_sigma2 <= 0 are never touched.
  CHECK(touch_value({1.0, 0.0}, 1.0).is_infinite());
}

TEST_CASE("q_plus for atoms and polytopes") {
  CHECK(q_plus_compute(ThetaLaw::point_mass({0.0, 1.0}), 1.0).q_plus == doctest::Approx(kGolden).epsilon(1e-15));
  const TangentGeometry g = q_plus_compute(unit_square(), 1.0);
  CHECK(std::abs(g.q_plus - kGolden) <= 1e-12);
  // Point mass (mu, s) with s > 0: q(q+1)s - q mu = q_tau.
  const double mu = 0.06, s = 0.02, qt = 1.0;
  const double b = 1.0 - mu / s;
  const double root = (-b + std::sqrt(b * b + 4 * qt / s)) / 2;
  CHECK(q_plus_compute(ThetaLaw::point_mass({mu, s}), qt).q_plus == doctest::Approx(root).epsilon(1e-13));
}

TEST_CASE("tangent line leaves the support on the correct side of q_plus") {
  const ThetaLaw laws[] = {unit_square(), ThetaLaw::zeta_family(3.0),
                           ThetaLaw::finite({{0.1, 0.3}, {0.5, 0.2}, {-0.2, 0.1}}, {0.2, 0.3, 0.5})};
  for (const auto& th : laws) {
    const double qp = q_plus_compute(th, 1.0).q_plus;
    CHECK(max_dot(th, qp - 1e-6) < 1.0);
    CHECK(max_dot(th, qp + 1e-6) > 1.0);
    CHECK(max_dot(th, qp) == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("H is zero at the touching point and positive inside") {
  const TangentGeometry g = q_plus_compute(unit_square(), 1.0);
  CHECK(g.h({0.0, 1.0}) == doctest::Approx(0.0).scale(1.0));
  for (double x : {0.1, 0.5, 0.9})
    for (double y : {0.0, 0.4, 0.99}) CHECK(g.h({x, y}) > 0);
  CHECK(g.h_mass_at_zero() == 0.0);
  CHECK(q_plus_compute(ThetaLaw::point_mass({0.0, 1.0}), 1.0).h_mass_at_zero() == doctest::Approx(1.0));
}

TEST_CASE("phi_nu against closed forms for a point mass") {
  // phi_nu(q) = phi_tau(q(q+1)s - q mu).
  const ThetaLaw th = ThetaLaw::point_mass({0.06, 0.02});
  for (double q : {0.0, 0.5, 1.0, 2.0, 3.0}) {
    const double x = q * (q + 1) * 0.02 - q * 0.06;
    CHECK(phi_nu_analytic(th, Distribution::exponential(1.0), q).value() ==
          doctest::Approx(1.0 / (1.0 - x)).epsilon(1e-12));
    CHECK(phi_nu_analytic(th, Distribution::deterministic(1.0), q).value() ==
          doctest::Approx(std::exp(x)).epsilon(1e-12));
    CHECK(phi_nu_analytic(th, Distribution::gamma(2.0, 0.5), q).value() ==
          doctest::Approx(std::pow(1.0 - 0.5 * x, -2.0)).epsilon(1e-12));
  }
}

TEST_CASE("phi_nu for the unit square against two-dimensional quadrature") {
  // Deterministic tau = 1: phi_nu(q) = int int exp(-q x + q(q+1) y) dx dy.
  const double q = 0.4;
  const double ix = (1.0 - std::exp(-q)) / q;
  const double iy = std::expm1(q * (q + 1)) / (q * (q + 1));
  CHECK(phi_nu_analytic(unit_square(), Distribution::deterministic(1.0), q).value() ==
        doctest::Approx(ix * iy).epsilon(1e-9));
}

TEST_CASE("Lundberg exponent is 2 mu / sigma^2 - 1 for constant coefficients") {
  for (const auto& tau : {Distribution::exponential(1.0), Distribution::deterministic(1.0),
                          Distribution::uniform(0.5, 1.5), Distribution::gamma(2.0, 0.5)}) {
    ModelConfig c = acceptance::beta2_config();
    c.interarrival = tau;
    const LundbergReport r = lundberg_report(c);
    REQUIRE(r.beta);
    CHECK(std::abs(*r.beta - 2.0) <= 1e-9);
    CHECK(r.flags.claim_moment_ok);
    CHECK(r.flags.cond_tau_ok);
  }
}

TEST_CASE("solve_beta on a known convex function") {
  // exp(q (q - 1)) crosses 1 at q = 1.
  const auto sol = solve_beta([](double q) { return MgfValue(std::exp(q * (q - 1))); }, ExtReal::infinity(), 1e-12);
  CHECK(sol.beta == doctest::Approx(1.0).epsilon(1e-11));
  CHECK_THROWS_AS(solve_beta([](double q) { return MgfValue(std::exp(q)); }, ExtReal::infinity(), 1e-12),
                  NumericalError);
}

TEST_CASE("zeta family classification and exponents") {
  const Distribution tau = Distribution::exponential(1.0);
  CHECK(theorem2_classify(q_plus_compute(ThetaLaw::zeta_family(2.0), 1.0), tau).verdict ==
        Verdict::endpoint_infinite);
  for (double p : {3.0, 4.0, 5.0})
    CHECK(theorem2_classify(q_plus_compute(ThetaLaw::zeta_family(p), 1.0), tau).verdict == Verdict::endpoint_finite);
  const LundbergReport r = lundberg_report(zeta_config(2.0));
  REQUIRE(r.q_nu);
  CHECK(r.q_nu->value() == doctest::Approx(kGolden).epsilon(1e-12));
  REQUIRE(r.beta);
  CHECK(*r.beta < kGolden);
  CHECK(phi_nu_analytic(ThetaLaw::zeta_family(2.0), tau, *r.beta).value() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("polytope classification depends on how the tangent meets the support") {
  const Distribution tau = Distribution::exponential(1.0);
  CHECK(theorem2_classify(q_plus_compute(unit_square(), 1.0), tau).verdict == Verdict::endpoint_finite);
  const double a = std::atan(kGolden);
  const double dx = std::cos(a), dy = std::sin(a);
  const ThetaLaw edge = ThetaLaw::polytope_uniform({{0, 1}, {dx, 1 + dy}, {dx + dy, 1 + dy - dx}, {dy, 1 - dx}});
  const TangentGeometry g = q_plus_compute(edge, 1.0);
  CHECK(g.touching_points.size() == 2);
  CHECK(theorem2_classify(g, tau).verdict == Verdict::endpoint_infinite);
  // Atom on the line: endpoint value infinite for exponential tau.
  CHECK(theorem2_classify(q_plus_compute(ThetaLaw::point_mass({0.0, 1.0}), 1.0), tau).verdict ==
        Verdict::endpoint_infinite);
}

TEST_CASE("Monte Carlo phi_nu agrees with the analytic value") {
  const ModelConfig c = zeta_config(4.0);
  const NuSample s = sample_nu(c, 200'000, 99);
  for (double q : {0.2, 0.4}) {
    const PhiEstimate e = phi_nu_mc(s, q);
    const double exact = phi_nu_analytic(ThetaLaw::zeta_family(4.0), c.interarrival, q).value();
    CHECK(std::abs(e.estimate - exact) <= 5 * e.std_error);
  }
  CHECK(phi_nu_mc(s, 0.0).estimate == 1.0);
}

TEST_CASE("Monte Carlo Lundberg exponent brackets the analytic one") {
  LundbergOptions o;
  o.force_monte_carlo = true;
  o.mc_samples = 200'000;
  o.seed = 4;
  o.tol = 1e-6;
  const LundbergReport r = lundberg_report(acceptance::beta2_config(), o);
  REQUIRE(r.beta);
  REQUIRE(r.ci_halfwidth);
  CHECK(std::abs(*r.beta - 2.0) <= 3 * *r.ci_halfwidth);
}

TEST_CASE("hypothesis violations are named") {
  ModelConfig c = acceptance::beta2_config();
  c.regime = regime::Constant{ThetaLaw::point_mass({0.02, 0.02})};
  c.mu_lower = 0.02;
  try {
    lundberg_report(c);
    FAIL("expected a violation");
  } catch (const HypothesisViolation& e) {
    CHECK(e.condition() == "mu_si_0");
  }
  c = acceptance::beta2_config();
  c.claim = Distribution::pareto(1.5, 1.0);
  CHECK_FALSE(lundberg_report(c).flags.claim_moment_ok);
  // cond_tau: q_tau = 1 against beta^2 s + beta (s - mu_lower)^+.
  c = acceptance::beta2_config();
  CHECK(cond_tau_holds(c, 2.0));
  c.sigma_upper = 0.7;
  CHECK_FALSE(cond_tau_holds(c, 2.0));
}

TEST_CASE("Monte Carlo standard error stays accurate for tiny q") {
  const NuSample s = sample_nu(acceptance::beta2_config(), 50'000, 8);
  double m = s.mean(), ss = 0;
  for (double v : s.nu) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / (s.nu.size() - 1));
  const double q = 1e-9;
  CHECK(phi_nu_mc(s, q).std_error == doctest::Approx(q * sd / std::sqrt(double(s.nu.size()))).epsilon(1e-3));
}
