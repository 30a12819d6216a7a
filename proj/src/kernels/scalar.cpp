#include <array>

#include "exp_impl.hpp"
#include "ruinlab/kernels.hpp"

namespace ruinlab::kernels {

namespace {

using detail::exp_scalar;

// Four partial sums assigned round-robin, reduced as (0+1)+(2+3): the same
// association the 256-bit variant uses, so the sums agree bit for bit.
struct Lanes {
  std::array<double, 4> acc{};
  double total() const { return (acc[0] + acc[1]) + (acc[2] + acc[3]); }
};

void exp_array(std::span<const double> x, std::span<double> out) {
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = exp_scalar(x[i]);
}

double interior_sum(std::span<const double> x) {
  Lanes lanes;
  for (std::size_t i = 0; i < x.size(); ++i) lanes.acc[i % 4] += exp_scalar(x[i]);
  return lanes.total();
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
  Lanes s, s2;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = exp_scalar(q * x[i]);
    s.acc[i % 4] += e;
    s2.acc[i % 4] += e * e;
  }
  return {s.total(), s2.total()};
}

std::size_t affine_advance(std::span<double> values, std::span<LaneState> state, std::span<const double> barrier,
                           double lambda, double zeta) {
  std::size_t active = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
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
    std::uint64_t c = 0;
    for (double s : samples) c += s > thresholds[j] ? 1 : 0;
    counts[j] += c;
  }
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", exp_array, exp_trapezoid, exp_sums, affine_advance, count_greater};
  return table;
}

}  // namespace ruinlab::kernels
