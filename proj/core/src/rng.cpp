#include "wbcbf/rng.hpp"

#include <cmath>
#include <numbers>

namespace wbcbf {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer; full-avalanche 64-bit mix.
std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ull;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebull;
  z ^= z >> 31;
  return z;
}

std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
  return mix64(mix64(seed + kGolden) ^ mix64(stream * 0xda942042e4dd58b5ull + kGolden));
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_(stream_id), key_(derive_key(seed, stream_id)) {}

RngStream RngStream::child(std::uint64_t child_id) const {
  RngStream c;
  c.seed_ = seed_;
  c.stream_ = mix64(stream_ * 0x2545f4914f6cdd1dull + child_id + 1);
  c.key_ = derive_key(key_, c.stream_);
  return c;
}

std::uint64_t RngStream::next_u64() {
  return mix64(key_ + (ctr_++) * kGolden);
}

double RngStream::next_unit() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

std::pair<double, double> RngStream::next_normal_pair() {
  double u1 = next_unit();
  const double u2 = next_unit();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double t = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(t), r * std::sin(t)};
}

double RngStream::next_normal() { return next_normal_pair().first; }

Vec2 gaussian_sample(const Gaussian2& g, RngStream& rng) {
  const auto [z1, z2] = rng.next_normal_pair();
  const SpdMat2& c = g.cov;
  // Guarded Cholesky: a zero-variance axis collapses to the mean.
  double l00 = 0.0, l10 = 0.0, l11 = 0.0;
  if (c.a > 0.0) {
    l00 = std::sqrt(c.a);
    l10 = c.b / l00;
    l11 = std::sqrt(std::max(c.d - l10 * l10, 0.0));
  } else {
    l11 = std::sqrt(std::max(c.d, 0.0));
  }
  return {g.mean.x + l00 * z1, g.mean.y + l10 * z1 + l11 * z2};
}

}  // namespace wbcbf
