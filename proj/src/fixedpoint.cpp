#include "zkfl/fixedpoint.hpp"

#include <cmath>
#include <sstream>

namespace zkfl::fx {

namespace {

void check_magnitude(unsigned __int128 magnitude, const FxConfig& cfg, const char* op) {
  if (magnitude >= cfg.magnitude_limit()) {
    throw OverflowError(std::string(op) + ": magnitude exceeds 2^" + std::to_string(cfg.magnitude_bits));
  }
}

}  // namespace

void FxConfig::validate(unsigned field_bits) const {
  if (scale_bits < 1) throw ConfigError("scale_bits must be at least 1");
  if (magnitude_bits > 62) throw ConfigError("magnitude_bits must not exceed 62");
  if (magnitude_bits < 2 * scale_bits + 8) {
    throw ConfigError("magnitude_bits must be at least 2*scale_bits+8");
  }
  if (2 * magnitude_bits + 1 >= field_bits) {
    throw ConfigError("2*magnitude_bits+1 must be below the field bit width");
  }
}

FxNum encode(double x, const FxConfig& cfg) {
  if (!std::isfinite(x)) throw OverflowError("encode: non-finite value");
  // x * 2^k is exact in binary floating point, so the only rounding is std::round
  // (half away from zero).
  const double scaled = std::round(std::ldexp(std::fabs(x), static_cast<int>(cfg.scale_bits)));
  if (scaled >= std::ldexp(1.0, static_cast<int>(cfg.magnitude_bits))) {
    throw OverflowError("encode: |x|*S exceeds 2^" + std::to_string(cfg.magnitude_bits));
  }
  return FxNum::from_parts(static_cast<std::uint64_t>(scaled), x < 0);
}

double decode(FxNum a, const FxConfig& cfg) {
  const double mag = std::ldexp(static_cast<double>(a.magnitude()), -static_cast<int>(cfg.scale_bits));
  return a.negative() ? -mag : mag;
}

FxNum from_scaled(std::int64_t scaled, const FxConfig& cfg) {
  const std::uint64_t mag = scaled < 0 ? std::uint64_t(0) - static_cast<std::uint64_t>(scaled)
                                       : static_cast<std::uint64_t>(scaled);
  check_magnitude(mag, cfg, "from_scaled");
  return FxNum::from_parts(mag, scaled < 0);
}

FxNum fx_add(FxNum a, FxNum b, const FxConfig& cfg) {
  if (a.negative() == b.negative()) {
    const unsigned __int128 sum = static_cast<unsigned __int128>(a.magnitude()) + b.magnitude();
    check_magnitude(sum, cfg, "fx_add");
    return FxNum::from_parts(static_cast<std::uint64_t>(sum), a.negative());
  }
  if (a.magnitude() >= b.magnitude()) {
    return FxNum::from_parts(a.magnitude() - b.magnitude(), a.negative());
  }
  return FxNum::from_parts(b.magnitude() - a.magnitude(), b.negative());
}

FxNum fx_neg(FxNum a) { return FxNum::from_parts(a.magnitude(), !a.negative()); }

FxNum fx_sub(FxNum a, FxNum b, const FxConfig& cfg) { return fx_add(a, fx_neg(b), cfg); }

FxNum fx_mul(FxNum a, FxNum b, const FxConfig& cfg) {
  const unsigned __int128 product = static_cast<unsigned __int128>(a.magnitude()) * b.magnitude();
  const unsigned __int128 quotient = product >> cfg.scale_bits;
  check_magnitude(quotient, cfg, "fx_mul");
  return FxNum::from_parts(static_cast<std::uint64_t>(quotient), a.negative() != b.negative());
}

FxNum fx_div_int(FxNum a, std::uint64_t divisor) {
  if (divisor == 0) throw RangeError("fx_div_int: division by zero");
  return FxNum::from_parts(a.magnitude() / divisor, a.negative());
}

FxNum fx_div_int_round(FxNum a, std::uint64_t divisor) {
  if (divisor == 0) throw RangeError("fx_div_int_round: division by zero");
  const unsigned __int128 twice = static_cast<unsigned __int128>(a.magnitude()) * 2 + divisor;
  return FxNum::from_parts(static_cast<std::uint64_t>(twice / (static_cast<unsigned __int128>(divisor) * 2)),
                           a.negative());
}

std::strong_ordering fx_cmp(FxNum a, FxNum b) {
  if (a.negative() != b.negative()) {
    return a.negative() ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  if (a.negative()) return b.magnitude() <=> a.magnitude();
  return a.magnitude() <=> b.magnitude();
}

std::string to_string(FxNum a, const FxConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << decode(a, cfg);
  return os.str();
}

}  // namespace zkfl::fx
