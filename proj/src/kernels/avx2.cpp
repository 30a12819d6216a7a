// Compiled with -mavx2 and without -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cstring>

#include "exp_impl.hpp"
#include "ruinlab/kernels.hpp"

namespace ruinlab::kernels {

namespace {

using detail::exp_scalar;

inline __m256d exp4(__m256d x) {
  const __m256d xc = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(detail::kExpMin)),
                                   _mm256_set1_pd(detail::kExpMax));
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(detail::kLog2e)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  const __m256d r = _mm256_sub_pd(_mm256_sub_pd(xc, _mm256_mul_pd(n, _mm256_set1_pd(detail::kLn2Hi))),
                                  _mm256_mul_pd(n, _mm256_set1_pd(detail::kLn2Lo)));
  __m256d p = _mm256_set1_pd(detail::kExpPoly[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(detail::kExpPoly[k]));

  // Integer n via the 1.5 * 2^52 shift, then 2^(n-1) from its exponent bits.
  const __m256d shift = _mm256_set1_pd(0x1.8p52);
  const __m256i ni = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, shift)), _mm256_castpd_si256(shift));
  const __m256i bits = _mm256_slli_epi64(_mm256_add_epi64(ni, _mm256_set1_epi64x(1022)), 52);
  __m256d y = _mm256_mul_pd(_mm256_mul_pd(p, _mm256_castsi256_pd(bits)), _mm256_set1_pd(2.0));

  y = _mm256_blendv_pd(y, _mm256_setzero_pd(), _mm256_cmp_pd(x, _mm256_set1_pd(detail::kExpMin), _CMP_LT_OQ));
  y = _mm256_blendv_pd(y, _mm256_set1_pd(__builtin_inf()),
                       _mm256_cmp_pd(x, _mm256_set1_pd(detail::kExpMax), _CMP_GT_OQ));
  return _mm256_blendv_pd(y, x, _mm256_cmp_pd(x, x, _CMP_UNORD_Q));
}

inline double reduce(__m256d v) {
  alignas(32) double a[4];
  _mm256_store_pd(a, v);
  return (a[0] + a[1]) + (a[2] + a[3]);
}

void exp_array(std::span<const double> x, std::span<double> out) {
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) _mm256_storeu_pd(out.data() + i, exp4(_mm256_loadu_pd(x.data() + i)));
  for (; i < x.size(); ++i) out[i] = exp_scalar(x[i]);
}

// Lane j accumulates elements j, j+4, j+8, ...; the tail goes to lanes 0..rem-1.
double interior_sum(std::span<const double> x) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) acc = _mm256_add_pd(acc, exp4(_mm256_loadu_pd(x.data() + i)));
  alignas(32) double a[4];
  _mm256_store_pd(a, acc);
  for (std::size_t j = 0; i < x.size(); ++i, ++j) a[j] += exp_scalar(x[i]);
  return (a[0] + a[1]) + (a[2] + a[3]);
}

double exp_trapezoid(std::span<const double> x, double dt, double last_dt) {
  const std::size_t nodes = x.size();
  if (nodes < 2) return 0.0;
  if (nodes == 2) return 0.5 * last_dt * (exp_scalar(x[0]) + exp_scalar(x[1]));
  const double inner = interior_sum(x.subspan(1, nodes - 3));
  return dt * (0.5 * exp_scalar(x[0]) + inner) + 0.5 * (dt + last_dt) * exp_scalar(x[nodes - 2]) +
         0.5 * last_dt * exp_scalar(x[nodes - 1]);
}

ExpSums exp_sums(std::span<const double> x, double q) {
  const __m256d qv = _mm256_set1_pd(q);
  __m256d s = _mm256_setzero_pd(), s2 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= x.size(); i += 4) {
    const __m256d e = exp4(_mm256_mul_pd(qv, _mm256_loadu_pd(x.data() + i)));
    s = _mm256_add_pd(s, e);
    s2 = _mm256_add_pd(s2, _mm256_mul_pd(e, e));
  }
  alignas(32) double a[4], b[4];
  _mm256_store_pd(a, s);
  _mm256_store_pd(b, s2);
  for (std::size_t j = 0; i < x.size(); ++i, ++j) {
    const double e = exp_scalar(q * x[i]);
    a[j] += e;
    b[j] += e * e;
  }
  return {(a[0] + a[1]) + (a[2] + a[3]), (b[0] + b[1]) + (b[2] + b[3])};
}

std::size_t affine_advance(std::span<double> values, std::span<LaneState> state, std::span<const double> barrier,
                           double lambda, double zeta) {
  const __m256d lv = _mm256_set1_pd(lambda), zv = _mm256_set1_pd(zeta), zero = _mm256_setzero_pd();
  std::size_t active = 0;
  std::size_t i = 0;
  for (; i + 4 <= values.size(); i += 4) {
    std::uint32_t packed;
    std::memcpy(&packed, state.data() + i, sizeof packed);
    if (((packed - 0x01010101u) & ~packed & 0x80808080u) == 0) continue;  // no active byte
    const __m256i st = _mm256_cvtepu8_epi64(_mm_cvtsi32_si128(static_cast<int>(packed)));
    const __m256d live = _mm256_castsi256_pd(_mm256_cmpeq_epi64(st, _mm256_setzero_si256()));
    const __m256d old = _mm256_loadu_pd(values.data() + i);
    const __m256d v = _mm256_blendv_pd(old, _mm256_add_pd(_mm256_mul_pd(lv, old), zv), live);
    _mm256_storeu_pd(values.data() + i, v);
    const int neg = _mm256_movemask_pd(_mm256_and_pd(live, _mm256_cmp_pd(v, zero, _CMP_LT_OQ)));
    const int over = _mm256_movemask_pd(
        _mm256_and_pd(live, _mm256_cmp_pd(v, _mm256_loadu_pd(barrier.data() + i), _CMP_GT_OQ)));
    const int alive = _mm256_movemask_pd(live);
    for (int j = 0; j < 4; ++j) {
      if (!(alive >> j & 1)) continue;
      if (neg >> j & 1)
        state[i + j] = LaneState::ruined;
      else if (over >> j & 1)
        state[i + j] = LaneState::barrier;
      else
        ++active;
    }
  }
  for (; i < values.size(); ++i) {
    if (state[i] != LaneState::active) continue;
    const double v = lambda * values[i] + zeta;
    values[i] = v;
    if (v < 0.0)
      state[i] = LaneState::ruined;
    else if (v > barrier[i])
      state[i] = LaneState::barrier;
    else
      ++active;
  }
  return active;
}

void count_greater(std::span<const double> samples, std::span<const double> thresholds,
                   std::span<std::uint64_t> counts) {
  for (std::size_t j = 0; j < thresholds.size(); ++j) {
    const __m256d t = _mm256_set1_pd(thresholds[j]);
    __m256i acc = _mm256_setzero_si256();
    std::size_t i = 0;
    for (; i + 4 <= samples.size(); i += 4) {
      const __m256d gt = _mm256_cmp_pd(_mm256_loadu_pd(samples.data() + i), t, _CMP_GT_OQ);
      acc = _mm256_sub_epi64(acc, _mm256_castpd_si256(gt));  // true lanes are all-ones = -1
    }
    alignas(32) std::uint64_t a[4];
    _mm256_store_si256(reinterpret_cast<__m256i*>(a), acc);
    std::uint64_t c = a[0] + a[1] + a[2] + a[3];
    for (; i < samples.size(); ++i) c += samples[i] > thresholds[j] ? 1 : 0;
    counts[j] += c;
  }
}

}  // namespace

const KernelTable* avx2_table_impl() {
  static const KernelTable table{"avx2", exp_array, exp_trapezoid, exp_sums, affine_advance, count_greater};
  return &table;
}

}  // namespace ruinlab::kernels
