#include "atd/bitvec.hpp"

#include <bit>
#include <cmath>
#include <stdexcept>

namespace atd {

BitVec::BitVec(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

BitVec BitVec::from_u64(std::size_t width, std::uint64_t value) {
  BitVec v(width);
  if (!v.words_.empty()) {
    v.words_[0] = value;
    v.mask_top();
  }
  return v;
}

BitVec BitVec::from_hex(std::string_view hex, std::size_t width) {
  BitVec v(width);
  std::size_t bit = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it) {
    const char c = *it;
    unsigned d;
    if (c >= '0' && c <= '9') {
      d = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      d = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      d = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw std::invalid_argument("bad hex digit in '" + std::string(hex) + "'");
    }
    for (unsigned k = 0; k < 4; ++k, ++bit) {
      if (((d >> k) & 1U) == 0) continue;
      if (bit >= width) {
        throw std::invalid_argument("hex value '" + std::string(hex) + "' exceeds width " +
                                    std::to_string(width));
      }
      v.set(bit, true);
    }
  }
  return v;
}

BitVec BitVec::from_bits(std::string_view bits) {
  BitVec v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const char c = bits[bits.size() - 1 - i];
    if (c != '0' && c != '1') {
      throw std::invalid_argument("bad bit character in '" + std::string(bits) + "'");
    }
    v.set(i, c == '1');
  }
  return v;
}

std::size_t BitVec::popcount() const noexcept {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitVec::any() const noexcept {
  for (auto w : words_) {
    if (w != 0) return true;
  }
  return false;
}

double BitVec::to_double() const noexcept {
  if (words_.size() == 1) return static_cast<double>(words_[0]);
  double v = 0.0;
  for (std::size_t k = words_.size(); k-- > 0;) {
    v = std::ldexp(v, 64) + static_cast<double>(words_[k]);
  }
  return v;
}

std::string BitVec::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t n = width_ == 0 ? 1 : (width_ + 3) / 4;
  std::string s(n, '0');
  for (std::size_t d = 0; d < n; ++d) {
    unsigned v = 0;
    for (unsigned k = 0; k < 4; ++k) {
      const std::size_t bit = d * 4 + k;
      if (bit < width_ && get(bit)) v |= 1U << k;
    }
    s[n - 1 - d] = kDigits[v];
  }
  return s;
}

std::string BitVec::to_bits() const {
  std::string s(width_, '0');
  for (std::size_t i = 0; i < width_; ++i) {
    if (get(i)) s[width_ - 1 - i] = '1';
  }
  return s;
}

namespace {
void require_same_width(const BitVec& a, const BitVec& b) {
  if (a.width() != b.width()) {
    throw std::invalid_argument("bit vector width mismatch: " + std::to_string(a.width()) +
                                " vs " + std::to_string(b.width()));
  }
}
}  // namespace

BitVec BitVec::operator&(const BitVec& o) const {
  require_same_width(*this, o);
  BitVec r(*this);
  for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] &= o.words_[k];
  return r;
}

BitVec BitVec::operator|(const BitVec& o) const {
  require_same_width(*this, o);
  BitVec r(*this);
  for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] |= o.words_[k];
  return r;
}

BitVec BitVec::operator^(const BitVec& o) const {
  require_same_width(*this, o);
  BitVec r(*this);
  for (std::size_t k = 0; k < words_.size(); ++k) r.words_[k] ^= o.words_[k];
  return r;
}

BitVec BitVec::operator~() const {
  BitVec r(*this);
  for (auto& w : r.words_) w = ~w;
  r.mask_top();
  return r;
}

std::strong_ordering BitVec::operator<=>(const BitVec& o) const noexcept {
  if (auto c = width_ <=> o.width_; c != 0) return c;
  for (std::size_t k = words_.size(); k-- > 0;) {
    if (auto c = words_[k] <=> o.words_[k]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

void BitVec::mask_top() noexcept {
  const std::size_t rem = width_ & 63;
  if (rem != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << rem) - 1;
}

}  // namespace atd
