// Counter-based uniform streams.
//
// Every uniform variate is a pure function of (seed, stream_id, lane, index),
// so replicas can be generated in any order, on any worker, and still produce
// bit-identical results. The generator core is Philox4x32-10 (Salmon et al.,
// "Parallel random numbers: as easy as 1, 2, 3", SC'11); one 128-bit block
// yields two 64-bit outputs.
#pragma once

#include <array>
#include <cstdint>

namespace merw {

/// Philox4x32-10 block function.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static constexpr Block encrypt(Block ctr, Key key) noexcept {
    ctr = round(ctr, key);
    for (int r = 1; r < 10; ++r) {
      key[0] += kWeyl0;
      key[1] += kWeyl1;
      ctr = round(ctr, key);
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

  static constexpr Block round(const Block& c, const Key& k) noexcept {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
  }
};

/// Maps 64 random bits to a double in [0, 1) with 53 bits of resolution.
constexpr double bits_to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Random-access view of one stream. Index i selects block i/2, half i%2.
class CounterRng {
 public:
  constexpr CounterRng(std::uint64_t seed, std::uint32_t stream_id,
                       std::uint32_t lane = 0) noexcept
      : key_{static_cast<std::uint32_t>(seed),
             static_cast<std::uint32_t>(seed >> 32)},
        stream_id_(stream_id),
        lane_(lane) {}

  constexpr Philox4x32::Block block(std::uint64_t block_index) const noexcept {
    return Philox4x32::encrypt({static_cast<std::uint32_t>(block_index),
                                static_cast<std::uint32_t>(block_index >> 32),
                                stream_id_, lane_},
                               key_);
  }

  constexpr std::uint64_t bits(std::uint64_t index) const noexcept {
    const auto b = block(index >> 1);
    return (index & 1u) ? (std::uint64_t{b[2]} | (std::uint64_t{b[3]} << 32))
                        : (std::uint64_t{b[0]} | (std::uint64_t{b[1]} << 32));
  }

  constexpr double uniform(std::uint64_t index) const noexcept {
    return bits_to_unit(bits(index));
  }

  constexpr std::uint32_t stream_id() const noexcept { return stream_id_; }
  constexpr std::uint32_t lane() const noexcept { return lane_; }

 private:
  Philox4x32::Key key_;
  std::uint32_t stream_id_;
  std::uint32_t lane_;
};

/// Sequential cursor over a CounterRng. next() at position i returns exactly
/// CounterRng::uniform(i); the cursor only caches the current block.
class UniformStream {
 public:
  UniformStream(std::uint64_t seed, std::uint32_t stream_id,
                std::uint32_t lane = 0) noexcept
      : rng_(seed, stream_id, lane) {}

  double next() noexcept { return bits_to_unit(next_bits()); }

  std::uint64_t next_bits() noexcept {
    const std::uint64_t block_index = pos_ >> 1;
    if (block_index != cached_ || !valid_) {
      cache_ = rng_.block(block_index);
      cached_ = block_index;
      valid_ = true;
    }
    const bool high = (pos_ & 1u) != 0;
    ++pos_;
    return high ? (std::uint64_t{cache_[2]} | (std::uint64_t{cache_[3]} << 32))
                : (std::uint64_t{cache_[0]} | (std::uint64_t{cache_[1]} << 32));
  }

  void seek(std::uint64_t index) noexcept { pos_ = index; }
  std::uint64_t position() const noexcept { return pos_; }
  const CounterRng& rng() const noexcept { return rng_; }

 private:
  CounterRng rng_;
  std::uint64_t pos_ = 0;
  std::uint64_t cached_ = 0;
  bool valid_ = false;
  Philox4x32::Block cache_{};
};

}  // namespace merw
