#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace mqe {

/// Deterministic random stream keyed by (seed, stream id).
///
/// The engine is std::mt19937_64; the conversions to uniform and Gaussian
/// variates are written out here so the draw sequence does not depend on the
/// standard library's distribution implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  /// Independent child stream; the same (parent, id) always yields the same child.
  RngStream substream(std::uint64_t id) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform01();
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace mqe
