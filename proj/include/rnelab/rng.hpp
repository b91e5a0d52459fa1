#pragma once

#include <array>
#include <cstdint>

namespace rnelab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Output is a pure function of (key, counter), so any substream can be
/// reproduced without replaying others.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter ctr, Key key);
};

/// Standard-normal stream for one substream (seed, stream_id).
/// Draw i of the stream depends only on (seed, stream_id, i).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, std::uint64_t stream_id);

  double normal();
  /// Uniform on the open interval (0, 1).
  double uniform();

  std::uint64_t stream_id() const { return stream_; }

 private:
  void refill();

  Philox4x32::Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<double, 2> uniforms_{};
  int uniform_pos_ = 2;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Mixes a 64-bit seed with a domain tag so that different consumers of the
/// same user seed (paths, bootstrap resamples, ...) get disjoint streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace rnelab
