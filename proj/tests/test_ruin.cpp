#include <doctest.h>

#include <cmath>

#include "ruinlab/acceptance.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/ruin.hpp"

using namespace ruinlab;

namespace {

RuinEstimate synthetic(double u, double psi, double hw) {
  RuinEstimate e;
  e.u = u;
  e.psi_hat = psi;
  e.ci_lo = psi - hw;
  e.ci_hi = psi + hw;
  e.ci_halfwidth = hw;
  return e;
}

}  // namespace

TEST_CASE("classical ruin probability") {
  CHECK(classical_psi(1.0, 1.0, 2.0, 2.0).psi == doctest::Approx(0.5 * std::exp(-1.0)).epsilon(1e-15));
  CHECK(classical_psi(1.0, 1.0, 2.0, 0.0).psi == doctest::Approx(0.5));
  const ClassicalPsi v = classical_psi(1.0, 1.0, 1.0, 3.0);
  CHECK(v.loading_violated);
  CHECK(v.psi == 1.0);
}

TEST_CASE("tail fit recovers an exact power law") {
  std::vector<RuinEstimate> est;
  for (double u : {10.0, 30.0, 100.0, 300.0}) est.push_back(synthetic(u, 3.0 * std::pow(u, -2.0), 1e-3 * std::pow(u, -2.0)));
  const TailFit f = fit_tail(est);
  CHECK(f.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f.r_squared == doctest::Approx(1.0));
  const BoundsCheck b = bounds_check(2.0, est);
  CHECK(b.spread == doctest::Approx(1.0));
  CHECK(b.ratio_min == doctest::Approx(3.0));
  CHECK(bounds_check(1.0, est).spread == doctest::Approx(30.0));
}

TEST_CASE("tail fit drops zero estimates and needs four points") {
  std::vector<RuinEstimate> est;
  for (double u : {1.0, 2.0, 4.0, 8.0, 16.0}) est.push_back(synthetic(u, 0.5 / u, 0.01));
  est.back().psi_hat = 0;
  CHECK_THROWS_AS(fit_tail({est[0], est[1], est[2]}), NumericalError);
  const TailFit f = fit_tail(est);
  CHECK(f.dropped.size() == 1);
  CHECK(f.slope == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("Monte Carlo matches the classical formula") {
  RuinOptions o;
  o.n_paths = 40'000;
  o.seed = 5;
  o.barrier_multiple = 25;
  for (const auto& e : estimate_psi_grid(acceptance::classical_config(), {0, 1, 3}, o)) {
    const double exact = classical_psi(1.0, 1.0, 2.0, e.u).psi;
    CHECK(std::abs(e.psi_hat - exact) <= 4 * e.ci_halfwidth);
    CHECK(e.ci_lo <= e.psi_hat);
    CHECK(e.psi_hat <= e.ci_hi);
  }
}

TEST_CASE("no claims means no ruin") {
  ModelConfig c = acceptance::beta2_config();
  c.claim = Distribution::deterministic(0.0);
  RuinOptions o;
  o.n_paths = 500;
  o.max_steps = 200;
  o.barrier_multiple = 1e3;
  for (const auto& e : estimate_psi_grid(c, {0.0, 1.0}, o)) CHECK(e.ruined == 0);
}

TEST_CASE("estimates do not depend on the worker count") {
  RuinOptions o;
  o.n_paths = 10'000;
  o.seed = 77;
  o.workers = 1;
  const auto a = estimate_psi_grid(acceptance::beta2_config(), {5, 20}, o);
  o.workers = 4;
  const auto b = estimate_psi_grid(acceptance::beta2_config(), {5, 20}, o);
  for (std::size_t j = 0; j < a.size(); ++j) {
    CHECK(a[j].ruined == b[j].ruined);
    CHECK(a[j].censored == b[j].censored);
  }
  const RuinEstimate single = estimate_psi(20, acceptance::beta2_config(), o);
  CHECK(single.u == 20);
}

TEST_CASE("random walk maximum decays with u") {
  RuinOptions o;
  o.n_paths = 20'000;
  o.seed = 3;
  const auto w = rw_max_diagnostic(acceptance::beta2_config(), {10, 30, 100}, o);
  REQUIRE(w.size() == 3);
  CHECK(w[0].p_hat > w[1].p_hat);
  CHECK(w[1].p_hat > w[2].p_hat);
  CHECK(w[2].p_hat > 0);
}
