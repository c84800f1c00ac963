#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace gmix {

// Counter-based Philox4x64-10 generator.
//
// Stream layout (stable across versions): the 128-bit key is
// (seed, stream_id); the 256-bit counter starts at zero and its low word is
// incremented once per block of four 64-bit outputs. Two streams with
// different (seed, stream_id) keys never share a block, and each stream has
// a period of 2^64 blocks before the low counter word wraps (it then carries
// into the next word, so the period is effectively 2^256).
class RngStream {
 public:
  using result_type = std::uint64_t;
  using Block = std::array<std::uint64_t, 4>;
  using Key = std::array<std::uint64_t, 2>;

  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
      : key_{seed, stream_id} {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 4) {
      buffer_ = philox(counter_, key_);
      increment();
      pos_ = 0;
    }
    return buffer_[pos_++];
  }

  std::uint64_t seed() const { return key_[0]; }
  std::uint64_t stream_id() const { return key_[1]; }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Unbiased integer in [0, bound) (Lemire's multiply-shift rejection).
  std::uint64_t uniform_index(std::uint64_t bound);

  // Standard normal (Marsaglia polar method with a cached spare).
  double normal();

  // One Philox4x64-10 block; exposed for known-answer tests.
  static Block philox(Block counter, Key key);

 private:
  void increment() {
    for (auto& w : counter_) {
      if (++w != 0) break;
    }
  }

  Key key_;
  Block counter_{0, 0, 0, 0};
  Block buffer_{};
  int pos_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gmix
