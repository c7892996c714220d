#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace zkfl::circuit {

using u128 = unsigned __int128;

/// Element of a prime field, always held in canonical form [0, p).
struct FieldElement {
  u128 value = 0;

  friend constexpr bool operator==(FieldElement, FieldElement) = default;
};

/// Arithmetic modulo a prime p < 2^127. The default modulus 2^127 - 1 uses a
/// shift-and-add reduction; any other prime falls back to 256-bit division.
class PrimeField {
 public:
  static constexpr u128 kMersenne127 = (u128{1} << 127) - 1;

  PrimeField() : PrimeField(kMersenne127) {}
  /// Throws ConfigError if p is not an odd prime below 2^127.
  explicit PrimeField(u128 modulus);

  u128 modulus() const { return p_; }
  unsigned bits() const;

  FieldElement zero() const { return {0}; }
  FieldElement one() const { return {1}; }
  FieldElement from_u64(std::uint64_t v) const { return {static_cast<u128>(v) % p_}; }
  FieldElement from_u128(u128 v) const { return {v % p_}; }
  FieldElement from_i64(std::int64_t v) const {
    return v < 0 ? neg(from_u64(std::uint64_t(0) - static_cast<std::uint64_t>(v))) : from_u64(static_cast<std::uint64_t>(v));
  }

  FieldElement add(FieldElement a, FieldElement b) const {
    u128 s = a.value + b.value;
    if (s >= p_) s -= p_;
    return {s};
  }
  FieldElement sub(FieldElement a, FieldElement b) const {
    return {a.value >= b.value ? a.value - b.value : a.value + (p_ - b.value)};
  }
  FieldElement neg(FieldElement a) const { return {a.value == 0 ? 0 : p_ - a.value}; }
  FieldElement mul(FieldElement a, FieldElement b) const {
    return mersenne_ ? mul_mersenne(a.value, b.value) : mul_generic(a.value, b.value);
  }
  FieldElement pow(FieldElement base, u128 exponent) const;
  /// Multiplicative inverse; inverse(0) is defined as 0.
  FieldElement inverse(FieldElement a) const;

  /// True when the element encodes a negative integer, i.e. lies above (p-1)/2.
  bool is_negative(FieldElement a) const { return a.value > p_ / 2; }

  std::string to_decimal(FieldElement a) const;
  /// Throws std::invalid_argument on bad digits or values >= p.
  FieldElement parse_decimal(std::string_view text) const;

  friend bool operator==(const PrimeField& a, const PrimeField& b) { return a.p_ == b.p_; }

 private:
  static FieldElement mul_mersenne(u128 a, u128 b);
  FieldElement mul_generic(u128 a, u128 b) const;

  u128 p_;
  bool mersenne_;
};

std::string u128_to_decimal(u128 v);
u128 u128_from_decimal(std::string_view text);

}  // namespace zkfl::circuit
