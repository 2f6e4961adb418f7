#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace verilab {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t value) noexcept;

/// Seed for the stream identified by a base seed plus an ordered list of keys
/// (example index, restart, epoch, ...). Distinct key lists give unrelated streams.
std::uint64_t stream_seed(std::uint64_t base, std::initializer_list<std::uint64_t> keys) noexcept;

/// Deterministic generator. The engine is mt19937_64; the transforms to
/// uniform/normal/integer draws are implemented here so output bits do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform in [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal (Box-Muller, one value per call).
  double normal();
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

}  // namespace verilab
