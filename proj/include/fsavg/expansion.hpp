#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fsavg/rng.hpp"

namespace fsavg {

/// Exact binary digits of a number u in [0, 1).
///
/// Iterating the doubling map in floating point destroys one mantissa bit
/// per step and collapses every orbit onto 0 after about 53 steps. Storing
/// the digits explicitly lets frac(2^n u) be read off as a bit window, so
/// doubling-type orbits of any length are exact up to the final rounding
/// of each window to a double.
///
/// Bit position p >= 1 carries weight 2^-p.
class BinaryExpansion {
 public:
  BinaryExpansion();

  /// Exact digits of a finite double in [0, 1).
  static BinaryExpansion from_double(double y);
  /// Digits of p/q (p < q) computed by long division, `bits` digits long.
  static BinaryExpansion from_rational(std::uint64_t p, std::uint64_t q, std::size_t bits);
  /// `bits` independent uniform digits.
  static BinaryExpansion random(CounterRng& rng, std::size_t bits);

  /// Exact sum modulo 1.
  BinaryExpansion plus(const BinaryExpansion& other) const;
  /// Exact 1 - u modulo 1.
  BinaryExpansion negated() const;
  /// Keeps digits 1..bits and zeroes the rest.
  BinaryExpansion truncated(std::size_t bits) const;
  /// Replaces digits after position `after` up to `total` with random digits.
  void randomize_tail(std::size_t after, std::size_t total, CounterRng& rng);
  /// Grows storage so that windows up to shift `bits` can be read.
  void reserve_bits(std::size_t bits);

  bool bit(std::size_t position) const;
  /// Position of the last nonzero digit, 0 for u = 0.
  std::size_t last_set_bit() const;
  std::size_t capacity_bits() const { return 64 * (words_.size() - kPad); }

  /// frac(2^shift u), truncated to 52 bits.
  double window(std::size_t shift) const;
  /// u truncated to 52 bits after the binary point.
  double value() const { return window(0); }
  /// u to double precision relative to its leading digit.
  double to_double() const;

  /// Padded word storage for the SIMD window kernel.
  const std::uint64_t* words() const { return words_.data(); }

 private:
  static constexpr std::size_t kPad = 2;
  explicit BinaryExpansion(std::size_t data_words);
  void set_bit(std::size_t position);

  std::vector<std::uint64_t> words_;
};

}  // namespace fsavg
