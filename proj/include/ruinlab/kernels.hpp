#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace ruinlab::kernels {

/// Sums of exp(q x) and exp(2 q x) over a sample.
struct ExpSums {
  double sum = 0.0;
  double sum_sq = 0.0;
};

/// Lane status for the lock-step affine recursion.
enum class LaneState : std::uint8_t { active = 0, ruined = 1, barrier = 2 };

/// Function table implemented once per instruction set.
///
/// Every variant computes exp with the same range reduction and polynomial
/// and never fuses multiply-add, so all variants return bit-identical results.
struct KernelTable {
  std::string_view isa;

  /// out[i] = exp(x[i]).
  void (*exp)(std::span<const double> x, std::span<double> out);

  /// Trapezoid rule for the integral of exp(x) on a grid with nodes
  /// x[0..m]: cells 0..m-2 have width `dt`, the last cell has width `last_dt`.
  double (*exp_trapezoid)(std::span<const double> x, double dt, double last_dt);

  /// Sums of exp(q * x[i]) and its square.
  ExpSums (*exp_sums)(std::span<const double> x, double q);

  /// One step S <- lambda * S + zeta on every active lane; lanes turning
  /// negative become `ruined`, lanes above their barrier become `barrier`.
  /// Returns the number of lanes still active.
  std::size_t (*affine_advance)(std::span<double> values, std::span<LaneState> state,
                                std::span<const double> barrier, double lambda, double zeta);

  /// counts[j] += #{i : samples[i] > thresholds[j]}.
  void (*count_greater)(std::span<const double> samples, std::span<const double> thresholds,
                        std::span<std::uint64_t> counts);
};

const KernelTable& scalar_table();

/// AVX2 table, or nullptr when not compiled in or not supported by this CPU.
const KernelTable* avx2_table();

/// The table selected at startup: AVX2 when available unless the environment
/// variable RUINLAB_ISA=scalar forces the reference path.
const KernelTable& active();

/// Overrides the active table (tests and benchmarking).
void set_active(const KernelTable& table);

}  // namespace ruinlab::kernels
