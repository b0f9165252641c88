#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace frohlich::quantum {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// Stream layout: key = 64-bit seed; counter words 0-1 = trajectory index,
/// words 2-3 = block number within the trajectory. Every trajectory therefore
/// owns an independent stream that does not depend on scheduling.
class Philox {
 public:
  using Block = std::array<std::uint32_t, 4>;

  static Block generate(Block ctr, std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
      const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
      key[0] += w0;
      key[1] += w1;
    }
    return ctr;
  }

  Philox(std::uint64_t seed, std::uint64_t stream)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return buf_[pos_++];
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    const std::uint64_t hi = next_u32(), lo = next_u32();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1], safe for logarithms.
  double uniform_open0() { return 1.0 - uniform(); }

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    buf_ = generate({static_cast<std::uint32_t>(stream_), static_cast<std::uint32_t>(stream_ >> 32),
                     static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32)},
                    key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Block buf_{};
  int pos_ = 4;
};

}  // namespace frohlich::quantum
