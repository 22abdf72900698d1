#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <random>

namespace encircle {

/// Stream domains keep range noise and target driving noise on disjoint substreams.
enum class StreamDomain : std::uint64_t {
  kRange = 0x52414e47ULL,        // "RANG"
  kTargetAccel = 0x54414343ULL,  // "TACC"
  kScratch = 0x53435241ULL,      // "SCRA"
};

/// splitmix64 fold over the key words. Stable across platforms and builds.
std::uint64_t mix_key(std::initializer_list<std::uint64_t> words);

/// Deterministic Gaussian noise source.
///
/// Uniforms take the top 53 bits of a mt19937_64 draw; normals use the Box-Muller
/// transform and hand out both outputs of each pair. Neither step depends on the
/// standard library's distribution implementations, so a given key reproduces the
/// same stream on any conforming toolchain (up to libm rounding in log/sin/cos).
class NoiseStream {
 public:
  explicit NoiseStream(std::uint64_t key);

  /// Uniform in (0, 1].
  double uniform();
  /// Standard normal.
  double gaussian();
  /// Normal with the given variance (variance 0 returns exactly 0).
  double gaussian(double variance);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

/// Substream for the range batch of (drone, target) at step k.
NoiseStream range_stream(std::uint64_t seed, int drone, int target, long step);

/// Substream for target j's driving acceleration at step k.
NoiseStream target_accel_stream(std::uint64_t seed, int target, long step);

}  // namespace encircle
