#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "ruinlab/kernels.hpp"

using namespace ruinlab;
using kernels::KernelTable;
using kernels::LaneState;

namespace {

std::vector<double> random_vector(std::size_t n, double lo, double hi, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

// Odd sizes exercise the vector tails.
const std::size_t kSizes[] = {0, 1, 3, 4, 5, 7, 8, 17, 1000, 1003};

}  // namespace

TEST_CASE("scalar exp is accurate against std::exp") {
  const auto x = random_vector(100'000, -700, 700, 1);
  std::vector<double> out(x.size());
  kernels::scalar_table().exp(x, out);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(out[i] / std::exp(x[i]) - 1.0));
  CHECK(worst < 4e-16);
  std::vector<double> edge{0.0, -800.0, 800.0, -INFINITY};
  std::vector<double> eo(edge.size());
  kernels::scalar_table().exp(edge, eo);
  CHECK(eo[0] == 1.0);
  CHECK(eo[1] == 0.0);
  CHECK(std::isinf(eo[2]));
  CHECK(eo[3] == 0.0);
}

TEST_CASE("trapezoid of exp against the exact integral") {
  // x_k = a t_k on [0, 1]: the integral of exp(a t) is (e^a - 1) / a.
  const double a = 0.3;
  const std::size_t m = 1000;
  std::vector<double> x(m + 1);
  for (std::size_t k = 0; k <= m; ++k) x[k] = a * double(k) / m;
  const double v = kernels::scalar_table().exp_trapezoid(x, 1.0 / m, 1.0 / m);
  CHECK(v == doctest::Approx(std::expm1(a) / a).epsilon(1e-7));
}

TEST_CASE("AVX2 kernels are bit-identical to the scalar ones") {
  const KernelTable* avx = kernels::avx2_table();
  if (avx == nullptr) {
    MESSAGE("AVX2 unavailable on this machine; equivalence not exercised");
    return;
  }
  const KernelTable& sc = kernels::scalar_table();
  for (std::size_t n : kSizes) {
    const auto x = random_vector(n, -50, 50, n + 1);
    std::vector<double> a(n), b(n);
    sc.exp(x, a);
    avx->exp(x, b);
    for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(a[i], b[i]));

    if (n >= 2) {
      const auto y = random_vector(n, -2, 2, n + 2);
      CHECK(same_bits(sc.exp_trapezoid(y, 0.01, 0.004), avx->exp_trapezoid(y, 0.01, 0.004)));
    }

    const auto nu = random_vector(n, -3, 1, n + 3);
    const auto sa = sc.exp_sums(nu, 1.7), sb = avx->exp_sums(nu, 1.7);
    CHECK(same_bits(sa.sum, sb.sum));
    CHECK(same_bits(sa.sum_sq, sb.sum_sq));

    auto va = random_vector(n, -1, 20, n + 4), vb = va;
    const auto barrier = random_vector(n, 15, 30, n + 5);
    std::vector<LaneState> ta(n, LaneState::active), tb(n, LaneState::active);
    for (int step = 0; step < 20; ++step) {
      const std::size_t ra = sc.affine_advance(va, ta, barrier, 1.05, -0.4);
      const std::size_t rb = avx->affine_advance(vb, tb, barrier, 1.05, -0.4);
      CHECK(ra == rb);
    }
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(same_bits(va[i], vb[i]));
      CHECK(ta[i] == tb[i]);
    }

    const auto thr = random_vector(5, 0, 30, n + 6);
    std::vector<std::uint64_t> ca(5, 0), cb(5, 0);
    sc.count_greater(va, thr, ca);
    avx->count_greater(va, thr, cb);
    CHECK(ca == cb);
  }
}

TEST_CASE("affine advance freezes finished lanes") {
  std::vector<double> v{-0.5, 5.0, 50.0};
  std::vector<LaneState> s(3, LaneState::active);
  const std::vector<double> barrier{100.0, 100.0, 10.0};
  const std::size_t active = kernels::scalar_table().affine_advance(v, s, barrier, 1.0, 0.0);
  CHECK(s[0] == LaneState::ruined);
  CHECK(s[1] == LaneState::active);
  CHECK(s[2] == LaneState::barrier);
  CHECK(active == 1);
  kernels::scalar_table().affine_advance(v, s, barrier, 2.0, 1.0);
  CHECK(v[0] == -0.5);
  CHECK(v[1] == 11.0);
  CHECK(v[2] == 50.0);
}
