#include "varsparse/rng.hpp"

#include "varsparse/matrix.hpp"

#include <cmath>
#include <numbers>

namespace varsparse {

bool all_finite(const Matrix& m) { return m.allFinite(); }

double CounterRng::uniform(std::uint64_t node, std::uint64_t row, std::uint64_t lane) const noexcept {
  std::uint64_t h = mix64(key_ ^ mix64(node * 0x9e3779b97f4a7c15ULL + 1));
  h = mix64(h ^ mix64(row * 4 + lane));
  return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t node, std::uint64_t row) const noexcept {
  const double u1 = uniform(node, row, 0);
  const double u2 = uniform(node, row, 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform(Engine& engine, double lo, double hi) {
  // Explicit conversion keeps draws identical across standard libraries.
  const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

}  // namespace varsparse
