#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ruinlab/acceptance.hpp"
#include "ruinlab/embedded.hpp"

using namespace ruinlab;

TEST_CASE("zero premium gives zeta = -claim") {
  ModelConfig c = acceptance::beta2_config();
  c.premium = premium::Zero{};
  StepBuilder b(c);
  StreamSet s(3, 0);
  for (int i = 0; i < 50; ++i) {
    const EmbeddedStep st = b.next(s, 0.0);
    CHECK(st.zeta == -st.claim);
    CHECK(st.premium_integral == 0.0);
  }
}

TEST_CASE("classical mode has lambda = 1 and zeta = c tau - claim") {
  const ModelConfig c = acceptance::classical_config();
  StepBuilder b(c);
  StreamSet s(4, 0);
  for (int i = 0; i < 50; ++i) {
    const EmbeddedStep st = b.next(s, 0.0);
    CHECK(st.lambda == 1.0);
    CHECK(st.zeta == doctest::Approx(2.0 * st.tau - st.claim).epsilon(1e-14));
  }
}

TEST_CASE("lambda and nu moments for unit inter-arrival times") {
  // lambda = exp(0.04 + 0.2 W(1)): E lambda = exp(0.06), E nu = -0.04.
  const ModelConfig c = acceptance::beta2_unit_tau_config();
  StepBuilder b(c);
  const std::size_t n = 200'000;
  double sl = 0, sl2 = 0, sn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    StreamSet s(11, i);
    const EmbeddedStep st = b.next(s, 0.0);
    sl += st.lambda;
    sl2 += st.lambda * st.lambda;
    sn += st.nu;
  }
  const double ml = sl / n;
  const double sd = std::sqrt((sl2 / n - ml * ml) / n);
  CHECK(std::abs(ml - std::exp(0.06)) <= 5 * sd);
  CHECK(std::abs(sn / n + 0.04) <= 5 * 0.2 / std::sqrt(double(n)));
}

TEST_CASE("constant premium integral against the closed form for sigma = 0") {
  // With no volatility exp(K(s)) = exp(m s) and the integral is c (exp(m tau) - 1) / m.
  ModelConfig c = acceptance::beta2_config();
  c.regime = regime::Constant{ThetaLaw::finite({{0.06, 0.0}}, {1.0})};
  c.grid_step = 1e-3;
  c.mu_lower = 0.06;
  StepBuilder b(c);
  const RegimeDraw d = [&] {
    StreamSet s(2, 0);
    return draw_regime(c, s);
  }();
  // exp(K) at grid nodes is smooth, so the trapezoid error is O(h^2).
  const EmbeddedStep st = b.build(d, 0.0, 0.0);
  const double exact = 0.1 * std::expm1(0.06 * d.tau) / 0.06;
  CHECK(st.premium_integral == doctest::Approx(exact).epsilon(1e-6));
  CHECK(st.lambda == doctest::Approx(std::exp(0.06 * d.tau)).epsilon(1e-14));
}

TEST_CASE("chain values satisfy the iterated form") {
  const ModelConfig c = acceptance::beta2_config();
  StreamSet s(21, 0);
  const ChainTrajectory t = simulate_chain(50.0, c, 200, 1e6, s);
  REQUIRE(t.steps.size() + 1 == t.values.size());
  for (std::size_t n = 1; n < t.values.size(); ++n) {
    // S_n = u prod lambda_k + sum_k zeta_k prod_{j>k} lambda_j.
    double prod = 1.0, acc = 0.0;
    for (std::size_t k = n; k-- > 0;) {
      acc += t.steps[k].zeta * prod;
      prod *= t.steps[k].lambda;
    }
    const double expected = 50.0 * prod + acc;
    CHECK(t.values[n] == doctest::Approx(expected).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("chain is linear in the initial reserve") {
  const ModelConfig c = acceptance::beta2_config();
  StreamSet a(8, 0), b(8, 0);
  const ChainTrajectory x = simulate_chain(1e6, c, 30, 1e9, a);
  const ChainTrajectory y = simulate_chain(2e6, c, 30, 1e9, b);
  REQUIRE(x.values.size() == y.values.size());
  for (std::size_t n = 1; n < x.values.size(); ++n) {
    double prod = 1.0;
    for (std::size_t k = 0; k < n; ++k) prod *= x.steps[k].lambda;
    CHECK(y.values[n] - x.values[n] == doctest::Approx(1e6 * prod).epsilon(1e-9));
  }
}

TEST_CASE("continuous integration agrees with the embedded chain at claim times") {
  for (const ModelConfig& c : {acceptance::beta2_config(), acceptance::classical_config()}) {
    StreamSet a(13, 0), b(13, 0);
    const ContinuousPath p = simulate_continuous(30.0, c, 25.0, a);
    REQUIRE(!p.values_at_claims.empty());
    const ChainTrajectory t = simulate_chain(30.0, c, p.values_at_claims.size(), 1e9, b);
    for (std::size_t n = 0; n < p.values_at_claims.size() && n + 1 < t.values.size(); ++n)
      CHECK(p.values_at_claims[n] == doctest::Approx(t.values[n + 1]).epsilon(1e-6).scale(1.0));
  }
}

TEST_CASE("chain stops at ruin, barrier or step cap") {
  const ModelConfig c = acceptance::beta2_config();
  StreamSet s(1, 0);
  const ChainTrajectory t = simulate_chain(0.0, c, 10'000, 1e3, s);
  CHECK(t.stopped_reason != StopReason::max_steps);
  if (t.ruin_index) CHECK(t.values[*t.ruin_index] < 0);
  StreamSet s2(1, 0);
  const ChainTrajectory capped = simulate_chain(1e3, c, 3, 1e3, s2);
  CHECK(capped.values.size() <= 4);
  CHECK(survival_barrier(c, 5.0, 10.0) == doctest::Approx(50.0));
  CHECK(survival_barrier(c, 0.1, 10.0) == doctest::Approx(10.0));
}

TEST_CASE("trajectory csv layout") {
  const ModelConfig c = acceptance::beta2_config();
  StreamSet s(2, 0);
  const ChainTrajectory t = simulate_chain(10.0, c, 5, 1e3, s);
  std::ostringstream os;
  write_trajectory_csv(os, t);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "n,S_n,lambda_n,zeta_n,nu_n");
  std::getline(is, line);
  CHECK(line == "0,10,,,");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == t.steps.size());
}
