#include "dhash/codes.hpp"

#include <bit>
#include <stdexcept>
#include <string>

namespace dhash {

BinaryCodes::BinaryCodes(std::size_t bits, std::size_t count)
    : bits_(bits), count_(count), packed_(count * ((bits + 7) / 8), 0) {}

BinaryCodes::BinaryCodes(std::size_t bits, std::size_t count, std::vector<std::uint8_t> packed)
    : bits_(bits), count_(count), packed_(std::move(packed)) {
  if (packed_.size() != count_ * bytes_per_code()) {
    throw std::invalid_argument("BinaryCodes: packed size " + std::to_string(packed_.size()) +
                                " != count * ceil(L/8) = " +
                                std::to_string(count_ * bytes_per_code()));
  }
  if (!padding_clear()) throw std::invalid_argument("BinaryCodes: padding bits must be zero");
}

BinaryCodes BinaryCodes::from_signs(const Matrix& b) {
  BinaryCodes out(static_cast<std::size_t>(b.rows()), static_cast<std::size_t>(b.cols()));
  for (Eigen::Index i = 0; i < b.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
      const double v = b(j, i);
      if (v != 1.0 && v != -1.0) {
        throw std::invalid_argument("BinaryCodes: entries must be -1 or +1");
      }
      if (v > 0) out.set_bit(static_cast<std::size_t>(j), static_cast<std::size_t>(i), true);
    }
  }
  return out;
}

Matrix BinaryCodes::to_signs() const {
  Matrix b(static_cast<Eigen::Index>(bits_), static_cast<Eigen::Index>(count_));
  for (std::size_t i = 0; i < count_; ++i) {
    for (std::size_t j = 0; j < bits_; ++j) {
      b(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = bit(j, i) ? 1.0 : -1.0;
    }
  }
  return b;
}

std::span<const std::uint8_t> BinaryCodes::code(std::size_t i) const {
  if (i >= count_) throw std::out_of_range("BinaryCodes: code index out of range");
  return {packed_.data() + i * bytes_per_code(), bytes_per_code()};
}

bool BinaryCodes::bit(std::size_t j, std::size_t i) const {
  return (packed_[i * bytes_per_code() + j / 8] >> (j % 8)) & 1u;
}

void BinaryCodes::set_bit(std::size_t j, std::size_t i, bool value) {
  std::uint8_t& byte = packed_[i * bytes_per_code() + j / 8];
  const auto mask = static_cast<std::uint8_t>(1u << (j % 8));
  byte = value ? static_cast<std::uint8_t>(byte | mask) : static_cast<std::uint8_t>(byte & ~mask);
}

bool BinaryCodes::padding_clear() const {
  if (bits_ % 8 == 0) return true;
  const auto pad_mask = static_cast<std::uint8_t>(0xFFu << (bits_ % 8));
  for (std::size_t i = 0; i < count_; ++i) {
    if (packed_[i * bytes_per_code() + bytes_per_code() - 1] & pad_mask) return false;
  }
  return true;
}

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                             std::size_t bits) {
  const std::size_t bytes = (bits + 7) / 8;
  if (a.size() < bytes || b.size() < bytes || a.size() != b.size()) {
    throw std::invalid_argument("hamming_distance: code length mismatch");
  }
  std::size_t d = 0;
  const std::size_t full = bits / 8;
  for (std::size_t k = 0; k < full; ++k) {
    d += static_cast<std::size_t>(std::popcount(static_cast<unsigned>(a[k] ^ b[k])));
  }
  if (bits % 8 != 0) {
    const unsigned mask = (1u << (bits % 8)) - 1u;
    d += static_cast<std::size_t>(std::popcount((a[full] ^ b[full]) & mask));
  }
  return d;
}

}  // namespace dhash
