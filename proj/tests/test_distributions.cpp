#include <doctest.h>

#include <cmath>
#include <numbers>

#include "ruinlab/distribution.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/random.hpp"

using namespace ruinlab;

namespace {

double sample_mean(const Distribution& d, std::size_t n, std::uint64_t seed, double* var = nullptr) {
  Engine rng(seed);
  double s = 0, s2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = d.sample(rng);
    s += x;
    s2 += x * x;
  }
  const double m = s / static_cast<double>(n);
  if (var) *var = s2 / static_cast<double>(n) - m * m;
  return m;
}

}  // namespace

TEST_CASE("mgf at zero is one for every family") {
  for (const auto& d : {Distribution::exponential(2.0), Distribution::gamma(2.5, 0.3), Distribution::deterministic(1.5),
                        Distribution::uniform(0.5, 1.5), Distribution::discrete({{1.0, 0.25}, {2.0, 0.75}}),
                        Distribution::lognormal(0.0, 0.5), Distribution::pareto(3.0, 1.0)}) {
    const MgfValue v = d.mgf(0.0);
    REQUIRE(v.is_finite());
    CHECK(v.value() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("closed-form mgfs agree with quadrature of exp(qx)") {
  struct Case {
    Distribution d;
    double q;
  };
  for (const auto& c : {Case{Distribution::exponential(2.0), 1.3}, Case{Distribution::gamma(2.5, 0.3), 2.0},
                        Case{Distribution::uniform(0.5, 1.5), -0.7}, Case{Distribution::lognormal(0.1, 0.4), -1.0}}) {
    const double quad = c.d.expect([&](double x) { return std::exp(c.q * x); }).value;
    CHECK(c.d.mgf(c.q).value() == doctest::Approx(quad).epsilon(1e-8));
  }
  // Hand-written oracles.
  CHECK(Distribution::exponential(2.0).mgf(1.3).value() == doctest::Approx(2.0 / 0.7).epsilon(1e-14));
  CHECK(Distribution::gamma(2.5, 0.3).mgf(2.0).value() == doctest::Approx(std::pow(1 - 0.6, -2.5)).epsilon(1e-14));
  CHECK(Distribution::uniform(0.5, 1.5).mgf(-0.7).value() ==
        doctest::Approx((std::exp(-0.7 * 1.5) - std::exp(-0.7 * 0.5)) / -0.7).epsilon(1e-14));
}

TEST_CASE("mgf end points") {
  CHECK(Distribution::exponential(2.0).mgf(2.0).is_infinite());
  CHECK(Distribution::gamma(3.0, 0.5).mgf_endpoint().q.value() == 2.0);
  CHECK(Distribution::deterministic(1.0).mgf_endpoint().q.is_infinite());
  CHECK(Distribution::lognormal(0.0, 1.0).mgf(1e-3).is_infinite());
  CHECK(Distribution::pareto(2.0, 1.0).mgf(1e-3).is_infinite());
  const MgfEndpoint ln = Distribution::lognormal(0.0, 1.0).mgf_endpoint();
  CHECK(ln.q.value() == 0.0);
  CHECK(ln.value_at_endpoint.value() == 1.0);
}

TEST_CASE("moments against closed forms") {
  const Distribution g = Distribution::gamma(2.5, 0.3);
  for (double p : {0.5, 1.0, 2.0, 3.7})
    CHECK(g.moment(p).value() ==
          doctest::Approx(std::pow(0.3, p) * std::tgamma(2.5 + p) / std::tgamma(2.5)).epsilon(1e-12));
  const Distribution par = Distribution::pareto(3.0, 2.0);
  CHECK(par.moment(2.0).value() == doctest::Approx(3.0 * 4.0 / 1.0).epsilon(1e-12));
  CHECK(par.moment(3.0).is_infinite());
  CHECK(Distribution::exponential(2.0).moment(2.0).value() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(Distribution::lognormal(0.2, 0.5).moment(2.0).value() ==
        doctest::Approx(std::exp(0.4 + 2 * 0.25)).epsilon(1e-12));
  CHECK_THROWS_AS(g.moment(-1.0), ConfigError);
}

TEST_CASE("sample means match the law of large numbers") {
  for (const auto& d : {Distribution::exponential(2.0), Distribution::gamma(2.5, 0.3), Distribution::uniform(0.5, 1.5),
                        Distribution::discrete({{1.0, 0.25}, {2.0, 0.75}}), Distribution::lognormal(0.0, 0.5)}) {
    double var = 0;
    const std::size_t n = 200'000;
    const double m = sample_mean(d, n, 17, &var);
    CHECK(std::abs(m - d.mean().value()) <= 5 * std::sqrt(var / n));
  }
}

TEST_CASE("mgf is convex along q") {
  const Distribution d = Distribution::gamma(2.0, 0.5);
  for (double q = -3; q < 1.5; q += 0.25) {
    const double a = d.mgf(q - 0.1).value(), b = d.mgf(q).value(), c = d.mgf(q + 0.1).value();
    CHECK(a + c - 2 * b >= 0);
  }
}

TEST_CASE("discrete laws merge ties and respect the cdf") {
  const Distribution d = Distribution::discrete({{2.0, 0.5}, {1.0, 0.25}, {2.0, 0.25}});
  const auto& k = std::get<dist::Discrete>(d.kind());
  REQUIRE(k.atoms.size() == 2);
  CHECK(k.atoms[1].prob == doctest::Approx(0.75));
  CHECK(d.cdf(1.5) == doctest::Approx(0.25));
  CHECK(d.cdf(2.0) == doctest::Approx(1.0));
}

TEST_CASE("monetary rescaling") {
  CHECK(Distribution::exponential(1.0).scaled(4.0).mean().value() == doctest::Approx(4.0));
  CHECK(Distribution::pareto(2.5, 1.0).scaled(3.0).support().lo == doctest::Approx(3.0));
  CHECK(Distribution::uniform(1, 2).scaled(0.5).cdf(0.75) == doctest::Approx(0.5));
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(Distribution::exponential(0.0), ConfigError);
  CHECK_THROWS_AS(Distribution::gamma(-1.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Distribution::uniform(2.0, 1.0), ConfigError);
  CHECK_THROWS_AS(Distribution::discrete({{1.0, 0.5}}), ConfigError);
  CHECK_THROWS_AS(Distribution::pareto(0.0, 1.0), ConfigError);
}
