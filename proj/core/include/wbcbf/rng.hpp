#pragma once

#include <cstdint>
#include <utility>

#include "wbcbf/geometry.hpp"

namespace wbcbf {

/// Counter-based random stream. The output at draw t is a pure function of
/// (seed, stream-id, t), so identical (seed, stream-id) pairs replay the same
/// sequence on every platform and child streams are statistically independent
/// of their parent. A stream is owned by exactly one consumer at a time.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  /// Derives an independent child stream. Does not advance this stream.
  RngStream child(std::uint64_t child_id) const;

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double next_unit();

  /// Two independent standard normal draws (Box-Muller).
  std::pair<double, double> next_normal_pair();
  double next_normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }
  std::uint64_t draws() const { return ctr_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t key_ = 0;
  std::uint64_t ctr_ = 0;
};

/// One draw from g: mean + L z with L a Cholesky-style factor of cov and z a
/// standard normal pair. Degenerate covariances are legal; a zero-variance
/// axis returns the mean on that axis.
Vec2 gaussian_sample(const Gaussian2& g, RngStream& rng);

}  // namespace wbcbf
