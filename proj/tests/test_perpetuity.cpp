#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ruinlab/acceptance.hpp"
#include "ruinlab/error.hpp"
#include "ruinlab/perpetuity.hpp"

using namespace ruinlab;

namespace {

// M = 1/2 and Q = +-1 with equal probability.
PerpetuityPair coin_pair(StreamSet& s) {
  return {0.5, (s.claims() & 1U) ? 1.0 : -1.0};
}

// Exact law of sup_n sum_{k<n} Q_k 2^-k over the first `depth` signs.
double coin_sup_exceedance(double u, int depth) {
  std::size_t hits = 0;
  for (std::uint32_t bits = 0; bits < (1U << depth); ++bits) {
    double sum = 0, sup = 0, w = 1;
    for (int k = 0; k < depth; ++k) {
      sum += ((bits >> k) & 1U ? 1.0 : -1.0) * w;
      sup = std::max(sup, sum);
      w *= 0.5;
    }
    hits += sup > u ? 1 : 0;
  }
  return double(hits) / double(1U << depth);
}

}  // namespace

TEST_CASE("geometric perpetuity") {
  StreamSet s(1, 0);
  const PerpetuitySample r = sample_R(constant_pair_sampler({0.5, 1.0}), 1000, 1e-12, s);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-11));
  StreamSet s2(1, 0);
  CHECK(sample_R(constant_pair_sampler({0.5, 0.0}), 1000, 1e-12, s2).value == 0.0);
  StreamSet s3(1, 0);
  CHECK_FALSE(sample_R(constant_pair_sampler({0.999, 1.0}), 10, 1e-12, s3).converged);
}

TEST_CASE("supremum perpetuity matches exhaustive enumeration") {
  // Terms beyond depth 12 move the supremum by at most 2^-11.
  const auto samples = sample_Rbar_batch(coin_pair, 100'000, 1000, 1e-12, 7, 1);
  std::vector<double> v;
  for (const auto& x : samples) v.push_back(x.value);
  for (double u : {0.1, 0.6, 1.2}) {
    const Exceedance e = exceedance(v, u);
    const double exact = coin_sup_exceedance(u, 20);
    CHECK(std::abs(e.p - exact) <= 5 * std::max(e.std_error, 1e-4));
  }
  // The supremum runs over n >= 1, so it is at least the first term.
  CHECK(*std::min_element(v.begin(), v.end()) >= -1.0);
}

TEST_CASE("fixed point distance separates converged and truncated samples") {
  const ModelConfig c = acceptance::beta2_config();
  const PairSampler up = upper_pair_sampler(c);
  const auto good = converged_values(sample_R_batch(up, 20'000, 100'000, 1e-12, 3));
  const auto pairs = sample_pairs(up, good.size(), 4);
  std::vector<double> truncated;
  for (const auto& x : sample_R_batch(up, 20'000, 2, 1e-12, 3)) truncated.push_back(x.value);
  const double ks_good = ks_fixed_point(good, pairs, 5);
  const double ks_bad = ks_fixed_point(truncated, pairs, 5);
  CHECK(ks_good < 0.02);
  CHECK(ks_bad > 3 * ks_good);
}

TEST_CASE("lower and upper pairs share the multiplier") {
  const ModelConfig c = acceptance::beta2_config();
  const PairSampler up = upper_pair_sampler(c, true), lo = lower_pair_sampler(c);
  for (std::uint64_t i = 0; i < 50; ++i) {
    StreamSet a(6, i), b(6, i);
    const PerpetuityPair p = up(a), q = lo(b);
    CHECK(p.a == q.a);
    CHECK(q.b <= p.b);
  }
}

TEST_CASE("coupled and uncoupled upper samplers have the same law") {
  const ModelConfig c = acceptance::beta2_config();
  const auto a = sample_pairs(upper_pair_sampler(c, false), 20'000, 1);
  const auto b = sample_pairs(upper_pair_sampler(c, true), 20'000, 2);
  std::vector<double> la, lb;
  for (const auto& p : a) la.push_back(std::log(p.a));
  for (const auto& p : b) lb.push_back(std::log(p.a));
  // Two-sample KS critical value at 0.1% for n = m = 20000 is about 0.0195.
  CHECK(numerics::ks_statistic(la, lb) < 0.0195);
}

TEST_CASE("Goldie constant rejects a degenerate multiplier") {
  std::vector<double> z(1000, 1.0);
  std::vector<PerpetuityPair> pairs(1000, PerpetuityPair{1.0, 1.0});
  CHECK_THROWS_AS(goldie_constant(z, pairs, 2.0), NumericalError);
}

TEST_CASE("perpetuity hypotheses") {
  std::vector<PerpetuityPair> expanding(100, PerpetuityPair{2.0, 1.0});
  try {
    check_perpetuity_hypotheses(expanding);
    FAIL("expected a violation");
  } catch (const HypothesisViolation& e) {
    CHECK(e.condition() == "EK_positive");
  }
  std::vector<PerpetuityPair> contracting(100, PerpetuityPair{0.5, 1.0});
  CHECK_NOTHROW(check_perpetuity_hypotheses(contracting));
}

TEST_CASE("exceedance and tail slope on an exact Pareto sample") {
  // Quantiles of P(X > x) = x^-2 on x >= 1.
  std::vector<double> v;
  const std::size_t n = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) v.push_back(1.0 / std::sqrt((i + 0.5) / double(n)));
  CHECK(exceedance(v, 10.0).p == doctest::Approx(0.01).epsilon(1e-3));
  CHECK(tail_slope(v, {2, 4, 8, 16}).slope == doctest::Approx(-2.0).epsilon(1e-3));
}

TEST_CASE("batch sampling does not depend on the worker count") {
  const ModelConfig c = acceptance::beta2_config();
  const auto a = sample_R_batch(upper_pair_sampler(c), 10000, 100'000, 1e-12, 9, 1);
  const auto b = sample_R_batch(upper_pair_sampler(c), 10000, 100'000, 1e-12, 9, 4);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].value == b[i].value);
}
