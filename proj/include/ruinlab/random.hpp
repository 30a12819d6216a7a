#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ruinlab {

using Engine = std::mt19937_64;

/// 64-bit finaliser from SplitMix64; a bijection with good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// FNV-1a over the label bytes.
constexpr std::uint64_t label_hash(std::string_view label) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Seed of the sub-stream named `label` for item `index` under `master`.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index = 0) noexcept {
  return mix64(mix64(master ^ label_hash(label)) + mix64(index ^ 0x5851f42d4c957f2dULL));
}

/// Standard-normal source bound to one engine.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}

  double operator()() { return normal_(engine_); }
  Engine& engine() noexcept { return engine_; }

 private:
  Engine engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// The three decorrelated generators used by one simulated path.
///
/// Claims, regime (inter-arrival times and coefficients) and Brownian
/// increments each get their own engine so that changing one distribution
/// never shifts the draws of the others.
struct StreamSet {
  Engine claims;
  Engine regime;
  GaussianStream brownian;

  StreamSet(std::uint64_t master, std::uint64_t index)
      : claims(derive_seed(master, "claims", index)),
        regime(derive_seed(master, "regime", index)),
        brownian(derive_seed(master, "brownian", index)) {}
};

}  // namespace ruinlab
