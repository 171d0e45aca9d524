#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "lpose/geometry.hpp"

namespace lpose {

// 64-bit FNV-1a over a byte stream. Used to derive per-sample seeds from
// (global_seed, index) so generated data is stable across platforms.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t index) {
  unsigned char bytes[16];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(global_seed >> (8 * i));
  for (int i = 0; i < 8; ++i) bytes[8 + i] = static_cast<unsigned char>(index >> (8 * i));
  return fnv1a64(bytes, sizeof(bytes));
}

// Deterministic random source. std::mt19937_64 is fully specified by the
// standard; the [0,1) mapping below avoids std::uniform_real_distribution,
// whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Uniform in (0, 1]; safe as a log() argument.
  double uniform_open() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double gaussian(double sigma = 1.0) {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  // Haar-uniform rotation (Shoemake's subgroup algorithm: uniform unit
  // quaternion from three uniform variates).
  Mat3 rotation() {
    const double u1 = uniform();
    const double u2 = uniform();
    const double u3 = uniform();
    const double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    const Eigen::Quaterniond q(a * std::sin(2.0 * kPi * u2), a * std::cos(2.0 * kPi * u2),
                               b * std::sin(2.0 * kPi * u3), b * std::cos(2.0 * kPi * u3));
    return q.toRotationMatrix();
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace lpose
