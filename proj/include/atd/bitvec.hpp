#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace atd {

/// Fixed-width bit vector. Bit 0 is the least significant bit; words are
/// little-endian and bits above width() are always zero.
class BitVec {
 public:
  BitVec() = default;
  explicit BitVec(std::size_t width);

  static BitVec from_u64(std::size_t width, std::uint64_t value);
  /// Parses a most-significant-first hex string. Throws std::invalid_argument
  /// on a bad digit or a value that does not fit in `width` bits.
  static BitVec from_hex(std::string_view hex, std::size_t width);
  /// Parses a most-significant-first binary string such as "1011".
  static BitVec from_bits(std::string_view bits);

  std::size_t width() const noexcept { return width_; }
  bool get(std::size_t i) const noexcept { return (words_[i >> 6] >> (i & 63)) & 1U; }
  void set(std::size_t i, bool v) noexcept {
    const std::uint64_t m = std::uint64_t{1} << (i & 63);
    if (v) {
      words_[i >> 6] |= m;
    } else {
      words_[i >> 6] &= ~m;
    }
  }

  std::span<const std::uint64_t> words() const noexcept { return words_; }
  std::uint64_t word(std::size_t w) const noexcept { return w < words_.size() ? words_[w] : 0; }
  /// Low 64 bits.
  std::uint64_t to_u64() const noexcept { return words_.empty() ? 0 : words_[0]; }

  std::size_t popcount() const noexcept;
  bool any() const noexcept;
  /// Numeric value as a double, correctly rounded for widths up to 64.
  double to_double() const noexcept;

  std::string to_hex() const;
  std::string to_bits() const;

  BitVec operator&(const BitVec& o) const;
  BitVec operator|(const BitVec& o) const;
  BitVec operator^(const BitVec& o) const;
  BitVec operator~() const;

  bool operator==(const BitVec& o) const noexcept = default;
  std::strong_ordering operator<=>(const BitVec& o) const noexcept;

 private:
  void mask_top() noexcept;

  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

}  // namespace atd
