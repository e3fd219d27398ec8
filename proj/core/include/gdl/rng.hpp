#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace gdl {

// 128-bit key; `a` and `b` are the two 64-bit halves in hash output order.
struct Key128 {
  std::uint64_t a = 0;
  std::uint64_t b = 0;

  friend bool operator==(const Key128&, const Key128&) = default;
};

// MurmurHash3_x64_128 with seed 0 over raw bytes. Pinned: changing it changes
// every sampled world, which golden tests catch.
Key128 stable_hash128(std::string_view bytes);

// Philox4x64 with 10 rounds (Salmon et al., Random123).
std::array<std::uint64_t, 4> philox4x64_10(std::array<std::uint64_t, 4> counter,
                                           std::array<std::uint64_t, 2> key);

// Counter-based stream: block i is philox4x64_10({i, 0, 0, 0}, key) and
// words are consumed in order. Two streams with the same key yield the same
// words, in any process.
class RngStream {
 public:
  explicit RngStream(Key128 key) : key_{key.a, key.b} {}

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of precision.
  double next_unit();
  // Uniform on (0, 1): the [0,1) grid shifted by half a step.
  double next_open_unit();

  Key128 key() const { return {key_[0], key_[1]}; }

 private:
  std::array<std::uint64_t, 2> key_;
  std::array<std::uint64_t, 4> block_{};
  std::uint64_t block_index_ = 0;
  unsigned used_ = 4;
};

}  // namespace gdl
