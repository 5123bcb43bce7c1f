#pragma once

#include <cstdint>
#include <random>

namespace varsparse {

/// SplitMix64 finalizer. Used both to derive independent seeds and as the
/// counter-based generator behind latent sampling.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Named sub-streams so every random decision of a run has its own seed.
enum class Stream : std::uint64_t {
  Dag = 1,
  Coefficients = 2,
  Design = 3,
  Samples = 4,
  Mixing = 5,
  Init = 6,
  Batches = 7,
  Ica = 8,
};

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) noexcept {
  return mix64(mix64(seed) ^ (salt * 0xd1b54a32d192ed03ULL));
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, Stream s) noexcept {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

using Engine = std::mt19937_64;

/// Stateless generator keyed by (seed, node, row): any cell of a sample
/// matrix can be produced independently of the others.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  /// Uniform on (0, 1], 53-bit resolution.
  double uniform(std::uint64_t node, std::uint64_t row, std::uint64_t lane) const noexcept;

  /// Standard normal via Box-Muller on two counter draws.
  double normal(std::uint64_t node, std::uint64_t row) const noexcept;

 private:
  std::uint64_t key_;
};

double uniform(Engine& engine, double lo, double hi);

}  // namespace varsparse
