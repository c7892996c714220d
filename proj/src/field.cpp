#include "zkfl/field.hpp"

#include <algorithm>
#include <stdexcept>

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/miller_rabin.hpp>

#include "zkfl/errors.hpp"

namespace zkfl::circuit {

namespace mp = boost::multiprecision;

namespace {

mp::uint256_t to_mp(u128 v) {
  mp::uint256_t r = static_cast<std::uint64_t>(v >> 64);
  r <<= 64;
  r |= static_cast<std::uint64_t>(v);
  return r;
}

u128 from_mp(const mp::uint256_t& v) {
  const auto lo = static_cast<std::uint64_t>(v & std::numeric_limits<std::uint64_t>::max());
  const auto hi = static_cast<std::uint64_t>((v >> 64) & std::numeric_limits<std::uint64_t>::max());
  return (static_cast<u128>(hi) << 64) | lo;
}

}  // namespace

PrimeField::PrimeField(u128 modulus) : p_(modulus), mersenne_(modulus == kMersenne127) {
  if (p_ < 3 || (p_ >> 127) != 0 || p_ % 2 == 0) throw ConfigError("field modulus must be an odd prime below 2^127");
  if (!mersenne_ && !mp::miller_rabin_test(mp::cpp_int(to_mp(p_)), 40)) {
    throw ConfigError("field modulus is not prime");
  }
}

unsigned PrimeField::bits() const {
  unsigned b = 0;
  for (u128 v = p_; v != 0; v >>= 1) ++b;
  return b;
}

FieldElement PrimeField::mul_mersenne(u128 a, u128 b) {
  // 256-bit schoolbook product, then fold: x mod (2^127-1) = (x & p) + (x >> 127).
  const std::uint64_t a0 = static_cast<std::uint64_t>(a), a1 = static_cast<std::uint64_t>(a >> 64);
  const std::uint64_t b0 = static_cast<std::uint64_t>(b), b1 = static_cast<std::uint64_t>(b >> 64);
  const u128 p00 = static_cast<u128>(a0) * b0;
  const u128 p01 = static_cast<u128>(a0) * b1;
  const u128 p10 = static_cast<u128>(a1) * b0;
  const u128 p11 = static_cast<u128>(a1) * b1;

  const u128 mid = (p00 >> 64) + static_cast<std::uint64_t>(p01) + static_cast<std::uint64_t>(p10);
  const u128 lo = (mid << 64) | static_cast<std::uint64_t>(p00);
  const u128 hi = p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64);

  u128 r = (lo & kMersenne127) + ((hi << 1) | (lo >> 127));
  r = (r & kMersenne127) + (r >> 127);
  if (r >= kMersenne127) r -= kMersenne127;
  return {r};
}

FieldElement PrimeField::mul_generic(u128 a, u128 b) const {
  const mp::uint256_t product = to_mp(a) * to_mp(b);
  return {from_mp(product % to_mp(p_))};
}

FieldElement PrimeField::pow(FieldElement base, u128 exponent) const {
  FieldElement result = one();
  while (exponent != 0) {
    if (exponent & 1) result = mul(result, base);
    base = mul(base, base);
    exponent >>= 1;
  }
  return result;
}

FieldElement PrimeField::inverse(FieldElement a) const {
  if (a.value == 0) return zero();
  return pow(a, p_ - 2);
}

std::string PrimeField::to_decimal(FieldElement a) const { return u128_to_decimal(a.value); }

FieldElement PrimeField::parse_decimal(std::string_view text) const {
  const u128 v = u128_from_decimal(text);
  if (v >= p_) throw std::invalid_argument("field element out of range");
  return {v};
}

std::string u128_to_decimal(u128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

u128 u128_from_decimal(std::string_view text) {
  if (text.empty() || text.size() > 39) throw std::invalid_argument("invalid decimal integer");
  u128 v = 0;
  for (char c : text) {
    if (c < '0' || c > '9') throw std::invalid_argument("invalid decimal integer");
    const unsigned digit = static_cast<unsigned>(c - '0');
    if (v > (~u128{0} - digit) / 10) throw std::invalid_argument("decimal integer overflows 128 bits");
    v = v * 10 + digit;
  }
  return v;
}

}  // namespace zkfl::circuit
