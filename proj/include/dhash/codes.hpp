#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dhash/numerics.hpp"

namespace dhash {

// Packed binary codes. Code i occupies bytes_per_code() bytes; bit j of code i
// (byte j / 8, bit j % 8, LSB first) is set iff entry (j, i) is +1. Bits past
// `bits` in the last byte are zero.
class BinaryCodes {
 public:
  BinaryCodes() = default;
  BinaryCodes(std::size_t bits, std::size_t count);
  BinaryCodes(std::size_t bits, std::size_t count, std::vector<std::uint8_t> packed);

  // From an L x m matrix over {-1, +1}.
  static BinaryCodes from_signs(const Matrix& b);
  Matrix to_signs() const;

  std::size_t bits() const { return bits_; }
  std::size_t count() const { return count_; }
  std::size_t bytes_per_code() const { return (bits_ + 7) / 8; }

  std::span<const std::uint8_t> code(std::size_t i) const;
  bool bit(std::size_t j, std::size_t i) const;
  void set_bit(std::size_t j, std::size_t i, bool value);

  const std::vector<std::uint8_t>& packed() const { return packed_; }

  // True when every padding bit is zero.
  bool padding_clear() const;

  friend bool operator==(const BinaryCodes&, const BinaryCodes&) = default;

 private:
  std::size_t bits_ = 0;
  std::size_t count_ = 0;
  std::vector<std::uint8_t> packed_;
};

// Number of differing bits among the first `bits` bits.
std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                             std::size_t bits);

}  // namespace dhash
