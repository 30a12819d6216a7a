#include <doctest.h>

#include <cmath>

#include "ruinlab/acceptance.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/model.hpp"

using namespace ruinlab;

namespace {

std::string field_of(const ModelConfig& c) {
  try {
    c.validate();
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("regime draws are reproducible from the stream seeds") {
  const ModelConfig c = acceptance::beta2_config();
  StreamSet a(9, 3), b(9, 3);
  for (int i = 0; i < 5; ++i) {
    const RegimeDraw x = draw_regime(c, a), y = draw_regime(c, b);
    CHECK(x.tau == y.tau);
    CHECK(x.w_end == y.w_end);
    CHECK(x.wiener_increments == y.wiener_increments);
    CHECK(draw_claim(c, a) == draw_claim(c, b));
  }
}

TEST_CASE("constant mode grid ends exactly at W(tau)") {
  const ModelConfig c = acceptance::beta2_config();
  StreamSet s(1, 0);
  for (int i = 0; i < 20; ++i) {
    const RegimeDraw d = draw_regime(c, s);
    double w = 0, t = 0;
    for (std::size_t k = 0; k < d.cells(); ++k) {
      w += d.wiener_increments[k];
      t += d.cell_width(k);
    }
    CHECK(w == doctest::Approx(d.w_end).epsilon(1e-12));
    CHECK(t == doctest::Approx(d.tau).epsilon(1e-12));
    CHECK(d.last_step <= c.grid_step * (1 + 1e-12));
  }
}

TEST_CASE("nu-only draws match the full regime draw") {
  const ModelConfig c = acceptance::beta2_config();
  for (std::uint64_t i = 0; i < 10; ++i) {
    StreamSet a(5, i), b(5, i);
    const NuDraw n = draw_nu_constant(c, a);
    const RegimeDraw d = draw_regime(c, b);
    CHECK(n.tau == d.tau);
    CHECK(n.w_end == d.w_end);
    CHECK(n.nu() == doctest::Approx(-(0.06 - 0.02) * d.tau - 0.2 * d.w_end).epsilon(1e-14));
  }
}

TEST_CASE("expected K and the safety check") {
  ModelConfig c = acceptance::beta2_config();
  CHECK(c.expected_K().value() == doctest::Approx(0.04));
  CHECK(c.ek_positive());
  c.regime = regime::Constant{ThetaLaw::point_mass({0.02, 0.02})};
  c.mu_lower = 0.02;
  CHECK_FALSE(c.ek_positive());
}

TEST_CASE("validation names the offending field") {
  ModelConfig c = acceptance::beta2_config();
  c.grid_step = 0;
  CHECK(field_of(c) == "model.grid_step");
  c = acceptance::beta2_config();
  c.premium = premium::Constant{0.2};
  CHECK(field_of(c) == "model.premium.c");
  c = acceptance::beta2_config();
  c.mu_lower = 0.1;
  CHECK(field_of(c) == "model.regime.theta");
  c = acceptance::beta2_config();
  c.sigma_upper = 0.1;
  CHECK(field_of(c) == "model.regime.theta");
  c = acceptance::beta2_config();
  c.interarrival = Distribution::pareto(2.0, 1.0);
  CHECK(field_of(c) == "model.interarrival");
  CHECK(field_of(acceptance::beta2_config()).empty());
  CHECK(field_of(acceptance::classical_config()).empty());
}

TEST_CASE("monetary rescaling scales claims and premiums only") {
  const ModelConfig c = acceptance::beta2_config().scaled(4.0);
  CHECK(c.claim.mean().value() == doctest::Approx(4.0));
  CHECK(c.c_bar == doctest::Approx(0.4));
  CHECK(premium_rate(c.premium, 0.0) == doctest::Approx(0.4));
  CHECK(c.interarrival.mean().value() == doctest::Approx(1.0));
  CHECK(c.monetary_scale() == doctest::Approx(4.0));
}

TEST_CASE("exponentially decaying premium") {
  const premium::ExponentialDecay p{0.5, -0.1};
  CHECK(premium_rate(p, 0.0) == doctest::Approx(0.5));
  CHECK(premium_rate(p, 10.0) == doctest::Approx(0.5 * std::exp(-1.0)));
}
