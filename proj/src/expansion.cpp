#include "fsavg/expansion.hpp"

#include <algorithm>
#include <cmath>

#include "fsavg/error.hpp"
#include "fsavg/kernels.hpp"

namespace fsavg {

BinaryExpansion::BinaryExpansion() : words_(kPad + 1, 0) {}

BinaryExpansion::BinaryExpansion(std::size_t data_words)
    : words_(std::max<std::size_t>(data_words, 1) + kPad, 0) {}

void BinaryExpansion::set_bit(std::size_t position) {
  const std::size_t i = (position - 1) / 64;
  words_[i] |= std::uint64_t{1} << (63 - (position - 1) % 64);
}

bool BinaryExpansion::bit(std::size_t position) const {
  if (position == 0) throw DomainError("binary digit positions start at 1");
  const std::size_t i = (position - 1) / 64;
  if (i >= words_.size()) return false;
  return (words_[i] >> (63 - (position - 1) % 64)) & 1u;
}

BinaryExpansion BinaryExpansion::from_double(double y) {
  if (!std::isfinite(y) || y < 0.0 || y >= 1.0)
    throw DomainError("binary expansion needs a value in [0, 1)");
  // Subnormals reach position 1074.
  BinaryExpansion out(1075 / 64 + 1);
  if (y == 0.0) return out;
  int e = 0;
  const double f = std::frexp(y, &e);
  const auto m = static_cast<std::uint64_t>(std::ldexp(f, 53));
  for (int j = 0; j < 53; ++j)
    if ((m >> j) & 1u) out.set_bit(static_cast<std::size_t>(53 - e - j));
  return out;
}

BinaryExpansion BinaryExpansion::from_rational(std::uint64_t p, std::uint64_t q,
                                               std::size_t bits) {
  if (q == 0 || p >= q) throw DomainError("rational expansion needs 0 <= p < q");
  if (q > (std::uint64_t{1} << 62)) throw DomainError("denominator too large");
  BinaryExpansion out((bits + 63) / 64);
  std::uint64_t r = p;
  for (std::size_t pos = 1; pos <= bits; ++pos) {
    r <<= 1;
    if (r >= q) {
      r -= q;
      out.set_bit(pos);
    }
  }
  return out;
}

BinaryExpansion BinaryExpansion::random(CounterRng& rng, std::size_t bits) {
  BinaryExpansion out((bits + 63) / 64);
  out.randomize_tail(0, bits, rng);
  return out;
}

void BinaryExpansion::randomize_tail(std::size_t after, std::size_t total, CounterRng& rng) {
  if (total <= after) return;
  reserve_bits(total);
  std::size_t pos = after + 1;
  // Clear then fill whole words where possible.
  while (pos <= total) {
    const std::size_t i = (pos - 1) / 64;
    const unsigned offset = static_cast<unsigned>((pos - 1) % 64);
    const std::size_t span = std::min<std::size_t>(64 - offset, total - pos + 1);
    const std::uint64_t field =
        (span == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << span) - 1)) << (64 - offset - span);
    words_[i] = (words_[i] & ~field) | (rng.next_u64() & field);
    pos += span;
  }
}

void BinaryExpansion::reserve_bits(std::size_t bits) {
  const std::size_t need = (bits + 63) / 64 + 1 + kPad;
  if (words_.size() < need) words_.resize(need, 0);
}

BinaryExpansion BinaryExpansion::plus(const BinaryExpansion& other) const {
  const std::size_t n = std::max(words_.size(), other.words_.size());
  BinaryExpansion out(n - kPad);
  std::uint64_t carry = 0;
  for (std::size_t i = n; i-- > 0;) {
    const std::uint64_t a = i < words_.size() ? words_[i] : 0;
    const std::uint64_t b = i < other.words_.size() ? other.words_[i] : 0;
    const std::uint64_t s = a + b;
    const std::uint64_t c1 = s < a ? 1 : 0;
    const std::uint64_t t = s + carry;
    const std::uint64_t c2 = t < s ? 1 : 0;
    out.words_[i] = t;
    carry = c1 | c2;
  }
  return out;
}

BinaryExpansion BinaryExpansion::negated() const {
  BinaryExpansion out = *this;
  std::uint64_t carry = 1;
  for (std::size_t i = out.words_.size(); i-- > 0;) {
    const std::uint64_t t = ~out.words_[i] + carry;
    carry = (carry == 1 && out.words_[i] == 0) ? 1 : 0;
    out.words_[i] = t;
  }
  // u = 0 gives 2^(64n) - 0, which wraps to 0 as it should.
  return out;
}

double BinaryExpansion::to_double() const {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (words_[i] == 0) continue;
    const double hi = std::ldexp(static_cast<double>(words_[i]), -64 * static_cast<int>(i + 1));
    const double lo = i + 1 < words_.size()
                          ? std::ldexp(static_cast<double>(words_[i + 1]), -64 * static_cast<int>(i + 2))
                          : 0.0;
    return hi + lo;
  }
  return 0.0;
}

BinaryExpansion BinaryExpansion::truncated(std::size_t bits) const {
  BinaryExpansion out = *this;
  for (std::size_t i = 0; i < out.words_.size(); ++i) {
    const std::size_t first = 64 * i + 1;
    if (first > bits) {
      out.words_[i] = 0;
    } else if (first + 63 > bits) {
      const std::size_t keep = bits - first + 1;
      out.words_[i] &= ~((~std::uint64_t{0}) >> keep);
    }
  }
  return out;
}

std::size_t BinaryExpansion::last_set_bit() const {
  for (std::size_t i = words_.size(); i-- > 0;) {
    if (words_[i] != 0) {
      const int tz = __builtin_ctzll(words_[i]);
      return 64 * i + static_cast<std::size_t>(64 - tz);
    }
  }
  return 0;
}

double BinaryExpansion::window(std::size_t shift) const {
  if (shift / 64 + 2 > words_.size()) return 0.0;
  double out = 0.0;
  kernels::scalar_table().expansion_windows(words_.data(), shift, 1, 0.0, &out);
  return out;
}

}  // namespace fsavg
