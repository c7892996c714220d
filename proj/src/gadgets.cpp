#include "zkfl/gadgets.hpp"

#include <bit>

#include "zkfl/errors.hpp"

namespace zkfl::circuit {

void enforce_boolean(CircuitBuilder& cb, const Lc& s) { cb.enforce(s, Lc::constant(1) - s, Lc{}); }

Var range_check(CircuitBuilder& cb, const Lc& value, unsigned bits, const std::string& name) {
  const Var first = cb.allocate_block(name + ".bits", bits);
  cb.hint(BitsHint{cb.lower(value), first, bits});
  Lc packed;
  for (unsigned i = 0; i < bits; ++i) {
    enforce_boolean(cb, first + i);
    packed.add(first + i, i128{1} << i);
  }
  cb.enforce(packed, Lc::constant(1), value);
  return first;
}

Var is_nonzero(CircuitBuilder& cb, const Lc& value, const std::string& name) {
  const Var inv = cb.allocate(name + ".inv");
  const Var nz = cb.allocate(name + ".nz");
  cb.hint(NonZeroHint{cb.lower(value), inv, nz});
  cb.enforce(value, inv, nz);
  cb.enforce(value, Lc::constant(1) - Lc(nz), Lc{});
  return nz;
}

Var canonical_sign(CircuitBuilder& cb, const Lc& raw_sign, const Lc& magnitude, const std::string& name) {
  const Var nz = is_nonzero(cb, magnitude, name);
  const Var sign = cb.allocate(name + ".sign");
  cb.hint(ProductHint{cb.lower(raw_sign), {Term::make(nz, cb.field().one())}, sign});
  cb.enforce(raw_sign, nz, sign);
  return sign;
}

Lc sign_xor(CircuitBuilder& cb, Var sign_a, Var sign_b, const std::string& name) {
  const Var both = cb.allocate(name + ".sign_and");
  cb.hint(ProductHint{cb.lower(sign_a), cb.lower(sign_b), both});
  cb.enforce(sign_a, sign_b, both);
  return Lc(sign_a) + Lc(sign_b) - 2 * Lc(both);
}

QuotientRemainder divide_by_constant(CircuitBuilder& cb, const Lc& value, std::uint64_t divisor,
                                     unsigned quotient_bits, const std::string& name) {
  if (divisor == 0) throw ConfigError("division by zero in circuit");
  const Var q = cb.allocate(name + ".q");
  const Var r = cb.allocate(name + ".r");
  cb.hint(DivModHint{cb.lower(value), divisor, q, r});
  cb.enforce(Lc(q), Lc::constant(static_cast<i128>(divisor)), value - Lc(r));
  range_check(cb, q, quotient_bits, name + ".q");
  const unsigned rbits = static_cast<unsigned>(std::bit_width(divisor - 1));
  range_check(cb, r, rbits, name + ".r");
  if (!std::has_single_bit(divisor)) {
    // r < 2^rbits alone allows r >= divisor; also require divisor-1-r >= 0.
    range_check(cb, Lc::constant(static_cast<i128>(divisor - 1)) - Lc(r), rbits, name + ".r_gap");
  }
  return {q, r};
}

QuotientRemainder rescale(CircuitBuilder& cb, const Lc& value, const std::string& name) {
  return divide_by_constant(cb, value, cb.fx().scale(), cb.fx().magnitude_bits, name);
}

namespace {

Var raw_product(CircuitBuilder& cb, Var a, Var b, const std::string& name) {
  const Var c = cb.allocate(name + ".product");
  cb.hint(ProductHint{cb.lower(a), cb.lower(b), c});
  cb.enforce(a, b, c);
  return c;
}

}  // namespace

SignedWire signed_mul(CircuitBuilder& cb, SignedWire a, SignedWire b, const std::string& name) {
  const Var c = raw_product(cb, a.mag, b.mag, name);
  const Lc raw_sign = sign_xor(cb, a.sign, b.sign, name);
  return {c, canonical_sign(cb, raw_sign, c, name)};
}

SignedWire fixed_mul(CircuitBuilder& cb, SignedWire a, SignedWire b, const std::string& name) {
  const Var c = raw_product(cb, a.mag, b.mag, name);
  const Lc raw_sign = sign_xor(cb, a.sign, b.sign, name);
  const auto qr = rescale(cb, c, name + ".rescale");
  return {qr.quotient, canonical_sign(cb, raw_sign, qr.quotient, name)};
}

SignedWire decompose_signed(CircuitBuilder& cb, const Lc& value, const std::string& name, const SignedWire* target) {
  SignedWire out;
  if (target != nullptr) {
    out = *target;
  } else {
    out.mag = cb.allocate(name + ".mag");
    out.sign = cb.allocate(name + ".sign");
  }
  cb.hint(SignMagnitudeHint{cb.lower(value), out.mag, out.sign});
  cb.enforce(Lc::constant(1) - 2 * Lc(out.sign), out.mag, value);
  constrain_fixed_input(cb, out, name);
  return out;
}

SignedWire divide_signed(CircuitBuilder& cb, SignedWire a, std::uint64_t divisor, const std::string& name) {
  const auto qr = divide_by_constant(cb, a.mag, divisor, cb.fx().magnitude_bits, name);
  return {qr.quotient, canonical_sign(cb, a.sign, qr.quotient, name)};
}

void constrain_fixed_input(CircuitBuilder& cb, SignedWire a, const std::string& name) {
  enforce_boolean(cb, a.sign);
  range_check(cb, a.mag, cb.fx().magnitude_bits, name + ".mag");
  const Var nz = is_nonzero(cb, a.mag, name + ".mag");
  cb.enforce(a.sign, Lc::constant(1) - Lc(nz), Lc{});
}

Lc signed_value(CircuitBuilder& cb, SignedWire a, const std::string& name) {
  const Var t = cb.allocate(name + ".sign_mag");
  cb.hint(ProductHint{cb.lower(a.sign), cb.lower(a.mag), t});
  cb.enforce(a.sign, a.mag, t);
  return Lc(a.mag) - 2 * Lc(t);
}

}  // namespace zkfl::circuit
