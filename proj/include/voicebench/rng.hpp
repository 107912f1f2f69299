#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace voicebench {

/// Identifier recorded in manifests. Any implementation of the three
/// functions below with these constants reproduces every sampled value.
inline constexpr std::string_view kRngAlgorithm = "splitmix64-ctr-v1";

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Child seed for item `index` of a parent seed.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::uint64_t index) noexcept {
  return mix64(parent ^ mix64(index + kGoldenGamma));
}

/// Counter-based generator: draw i of stream s under seed k is
/// mix64(derive_seed(k, s) + (i + 1) * gamma). Streams are independent and
/// can be consumed in any order.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
      : key_(derive_seed(seed, stream)) {}

  constexpr std::uint64_t next() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * kGoldenGamma);
  }

  /// Uniform in [0, 1) with 53 random bits.
  constexpr double uniform() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) noexcept {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(next()) * static_cast<std::uint64_t>(n);
    return static_cast<std::size_t>(wide >> 64);
  }

  constexpr bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream ids used when realizing a mixture from its seed.
namespace rng_stream {
inline constexpr std::uint64_t kReverb = 1;
inline constexpr std::uint64_t kSnrNoise = 2;
inline constexpr std::uint64_t kSnrSpeech = 3;
inline constexpr std::uint64_t kNoiseOffset = 4;
inline constexpr std::uint64_t kPadOffset = 5;
inline constexpr std::uint64_t kBandwidth = 6;
inline constexpr std::uint64_t kSpeechPick = 7;
inline constexpr std::uint64_t kNoisePick = 8;
inline constexpr std::uint64_t kRirPick = 9;
inline constexpr std::uint64_t kCutoff = 10;
}  // namespace rng_stream

}  // namespace voicebench
