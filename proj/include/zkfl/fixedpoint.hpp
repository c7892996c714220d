#pragma once

#include <compare>
#include <cstdint>
#include <string>

#include "zkfl/errors.hpp"

namespace zkfl::fx {

/// Fixed-point format shared by the native trainer and the training circuit.
/// A value v is stored as round(v * 2^scale_bits) in sign-magnitude form, with
/// every magnitude strictly below 2^magnitude_bits.
struct FxConfig {
  unsigned scale_bits = 16;
  unsigned magnitude_bits = 48;

  std::uint64_t scale() const { return std::uint64_t{1} << scale_bits; }
  std::uint64_t magnitude_limit() const { return std::uint64_t{1} << magnitude_bits; }

  /// Throws ConfigError unless scale_bits >= 1, magnitude_bits >= 2*scale_bits+8
  /// and 2*magnitude_bits+1 < field_bits.
  void validate(unsigned field_bits = 127) const;

  friend bool operator==(const FxConfig&, const FxConfig&) = default;
};

/// Sign-magnitude scaled integer. Zero is always stored with a positive sign.
class FxNum {
 public:
  constexpr FxNum() = default;

  /// Builds a number from its raw parts; (0, negative) collapses to +0.
  static constexpr FxNum from_parts(std::uint64_t magnitude, bool negative) {
    FxNum r;
    r.magnitude_ = magnitude;
    r.negative_ = negative && magnitude != 0;
    return r;
  }

  constexpr std::uint64_t magnitude() const { return magnitude_; }
  constexpr bool negative() const { return negative_; }
  constexpr bool is_zero() const { return magnitude_ == 0; }

  friend constexpr bool operator==(const FxNum&, const FxNum&) = default;

 private:
  std::uint64_t magnitude_ = 0;
  bool negative_ = false;
};

FxNum encode(double x, const FxConfig& cfg);
double decode(FxNum a, const FxConfig& cfg);

/// Encodes an integer count of scale units, e.g. from_scaled(-3) = -3/S.
FxNum from_scaled(std::int64_t scaled, const FxConfig& cfg);

FxNum fx_add(FxNum a, FxNum b, const FxConfig& cfg);
FxNum fx_sub(FxNum a, FxNum b, const FxConfig& cfg);
FxNum fx_neg(FxNum a);

/// Product rescaled by 1/S with truncation toward zero.
FxNum fx_mul(FxNum a, FxNum b, const FxConfig& cfg);

/// Division by a positive integer, truncating toward zero.
FxNum fx_div_int(FxNum a, std::uint64_t divisor);

/// Division by a positive integer, rounding half away from zero.
FxNum fx_div_int_round(FxNum a, std::uint64_t divisor);

std::strong_ordering fx_cmp(FxNum a, FxNum b);

std::string to_string(FxNum a, const FxConfig& cfg);

}  // namespace zkfl::fx
