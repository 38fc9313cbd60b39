#pragma once

#include <cstdint>
#include <random>

namespace psmlab {

// Deterministic random stream used by every stochastic component.
//
// The generator is pinned so that a (seed) pair reproduces the exact same
// draw sequence on any platform and under any thread count:
//   * engine: std::mt19937_64 seeded with a single 64-bit value (the
//     initialization from one value is fully specified by the standard),
//   * uniform doubles: top 53 bits of the raw output, giving [0, 1),
//   * standard normals: Wichura's AS241 inverse normal CDF applied to a
//     uniform offset into (0, 1) -- no platform-dependent
//     std::normal_distribution is involved,
//   * bounded integers: Lemire's multiply-shift rejection method,
//   * Bernoulli: uniform < p.
//
// A stream is single-owner: one stream per replicate, never shared between
// concurrent tasks.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1), 53-bit resolution.
  double next_uniform();

  // Standard normal via the AS241 inverse CDF.
  double next_normal();

  // Uniform integer in [lo, hi], both bounds inclusive; unbiased.
  std::int64_t next_int(std::int64_t lo, std::int64_t hi);

  bool next_bernoulli(double p) { return next_uniform() < p; }

 private:
  std::uint64_t next_below(std::uint64_t bound);  // uniform in [0, bound)

  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

// splitmix64 finalizer; bijective on 64-bit words.
std::uint64_t mix64(std::uint64_t z) noexcept;

// Seed derivation for independent substreams. Streams for distinct
// (domain, index) pairs are independent for replication purposes; results
// therefore do not depend on scheduling or worker count.
//
// Reserved domains: replicate attempt t uses domain == t (0 for the first
// draw of a replicate, 1 for its first retry, ...); scenario-level
// coefficient selection uses kCoefficientDomain.
std::uint64_t derive_stream_seed(std::uint64_t base_seed, std::uint64_t domain,
                                 std::uint64_t index) noexcept;

inline constexpr std::uint64_t kCoefficientDomain = 0x636f656673656cULL;  // "coefsel"

inline RandomStream substream(std::uint64_t base_seed, std::uint64_t index) {
  return RandomStream(derive_stream_seed(base_seed, 0, index));
}

inline RandomStream substream(std::uint64_t base_seed, std::uint64_t domain,
                              std::uint64_t index) {
  return RandomStream(derive_stream_seed(base_seed, domain, index));
}

// Inverse of the standard normal CDF (AS241, double precision). Exposed for
// tests; p must lie in (0, 1).
double inverse_normal_cdf(double p);

}  // namespace psmlab
