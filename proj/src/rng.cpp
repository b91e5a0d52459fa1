#include "rnelab/rng.hpp"

#include <cmath>
#include <numbers>

namespace rnelab {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
  // 53 random bits, shifted by half an ulp so 0 is never produced.
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return (static_cast<double>(bits & ((1ull << 53) - 1)) + 0.5) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kMul0, ctr[0], hi0, lo0);
    mulhilo(kMul1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag));
}

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream_id)
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_(stream_id) {}

void GaussianStream::refill() {
  const Philox4x32::Counter ctr{static_cast<std::uint32_t>(block_),
                                static_cast<std::uint32_t>(block_ >> 32),
                                static_cast<std::uint32_t>(stream_),
                                static_cast<std::uint32_t>(stream_ >> 32)};
  const auto out = Philox4x32::generate(ctr, key_);
  ++block_;
  uniforms_[0] = to_open_unit(out[0], out[1]);
  uniforms_[1] = to_open_unit(out[2], out[3]);
  uniform_pos_ = 0;
}

double GaussianStream::uniform() {
  if (uniform_pos_ >= 2) refill();
  return uniforms_[uniform_pos_++];
}

double GaussianStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  // Box-Muller on a fresh pair of uniforms.
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace rnelab
