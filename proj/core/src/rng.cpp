#include "encircle/rng.hpp"

#include <cmath>
#include <numbers>

namespace encircle {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t mix_key(std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = 0x6a09e667f3bcc909ULL;
  for (std::uint64_t w : words) {
    h = splitmix64(h ^ splitmix64(w));
  }
  return h;
}

NoiseStream::NoiseStream(std::uint64_t key) : engine_(key) {}

double NoiseStream::uniform() {
  // (bits + 1) * 2^-53 lies in (0, 1], keeping log() finite.
  const std::uint64_t bits = engine_() >> 11;
  return static_cast<double>(bits + 1) * 0x1.0p-53;
}

double NoiseStream::gaussian() {
  if (spare_) {
    const double z = *spare_;
    spare_.reset();
    return z;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

double NoiseStream::gaussian(double variance) {
  if (variance == 0.0) return 0.0;
  return std::sqrt(variance) * gaussian();
}

NoiseStream range_stream(std::uint64_t seed, int drone, int target, long step) {
  return NoiseStream(mix_key({seed, static_cast<std::uint64_t>(StreamDomain::kRange),
                              static_cast<std::uint64_t>(drone), static_cast<std::uint64_t>(target),
                              static_cast<std::uint64_t>(step)}));
}

NoiseStream target_accel_stream(std::uint64_t seed, int target, long step) {
  return NoiseStream(mix_key({seed, static_cast<std::uint64_t>(StreamDomain::kTargetAccel),
                              static_cast<std::uint64_t>(target),
                              static_cast<std::uint64_t>(step)}));
}

}  // namespace encircle
