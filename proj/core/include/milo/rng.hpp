#pragma once

#include <cstdint>
#include <limits>

namespace milo {

// SplitMix64 finalizer; a bijection on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

enum class StreamDomain : std::uint64_t {
  kStochasticGreedy = 1,  // (subset index, class id)
  kWeightedExploration = 2,  // (phase index, class id)
  kTest = 0xff,
};

// Positional stream id; distinct (domain, a, b) triples give unrelated streams.
constexpr std::uint64_t stream_id(StreamDomain domain, std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t h = mix64(static_cast<std::uint64_t>(domain) + 0x9E3779B97F4A7C15ULL);
  h = mix64(h ^ (a + 0x632BE59BD9B4E019ULL));
  return mix64(h ^ (b + 0x85157AF5ULL));
}

/// xoshiro256** keyed by (seed, stream id). The state is expanded from both
/// words with SplitMix64, so identical keys reproduce identical sequences.
/// Satisfies UniformRandomBitGenerator, but the helpers below should be
/// preferred to <random> distributions, whose output is library-specific.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }
  result_type operator()() noexcept { return next_u64(); }

  std::uint64_t next_u64() noexcept;
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform_open01() noexcept;
  // Unbiased uniform integer in [0, bound); bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
};

}  // namespace milo
