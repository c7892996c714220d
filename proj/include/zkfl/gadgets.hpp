#pragma once

#include <string>

#include "zkfl/builder.hpp"

namespace zkfl::circuit {

/// A fixed-point number inside the circuit: magnitude wire plus sign bit wire.
struct SignedWire {
  Var mag;
  Var sign;
};

/// s * (1 - s) = 0
void enforce_boolean(CircuitBuilder& cb, const Lc& s);

/// Allocates `bits` boolean wires and packs them to `value`. Proves
/// 0 <= value < 2^bits. Returns the first bit wire.
Var range_check(CircuitBuilder& cb, const Lc& value, unsigned bits, const std::string& name);

/// nz = (v != 0) via v*inv = nz and v*(1-nz) = 0. Returns nz.
Var is_nonzero(CircuitBuilder& cb, const Lc& value, const std::string& name);

/// sign = raw_sign * nz(magnitude): forces a positive sign on zero.
Var canonical_sign(CircuitBuilder& cb, const Lc& raw_sign, const Lc& magnitude, const std::string& name);

/// s_a XOR s_b = s_a + s_b - 2 s_a s_b. Allocates the product wire.
Lc sign_xor(CircuitBuilder& cb, Var sign_a, Var sign_b, const std::string& name);

struct QuotientRemainder {
  Var quotient;
  Var remainder;
};

/// value = q * divisor + r with 0 <= r < divisor and q < 2^quotient_bits.
QuotientRemainder divide_by_constant(CircuitBuilder& cb, const Lc& value, std::uint64_t divisor,
                                     unsigned quotient_bits, const std::string& name);

/// Division by the fixed-point scale S = 2^scale_bits with the quotient held to
/// magnitude_bits.
QuotientRemainder rescale(CircuitBuilder& cb, const Lc& value, const std::string& name);

/// Raw signed product: c_mag = a_mag * b_mag (not rescaled) and
/// c_sign = (s_a XOR s_b) * nz(c_mag).
SignedWire signed_mul(CircuitBuilder& cb, SignedWire a, SignedWire b, const std::string& name);

/// Fixed-point product: magnitude = floor(a_mag * b_mag / S), sign = XOR of
/// signs, canonical when the rescaled magnitude is zero.
SignedWire fixed_mul(CircuitBuilder& cb, SignedWire a, SignedWire b, const std::string& name);

/// Proves that (mag, sign) is the sign-magnitude form of a signed field value:
/// (1 - 2 sign) * mag = value, mag < 2^magnitude_bits, canonical zero.
/// Writes into `target` when given, otherwise allocates fresh wires.
SignedWire decompose_signed(CircuitBuilder& cb, const Lc& value, const std::string& name,
                            const SignedWire* target = nullptr);

/// Sign-magnitude division by a positive constant, truncating toward zero.
SignedWire divide_signed(CircuitBuilder& cb, SignedWire a, std::uint64_t divisor, const std::string& name);

/// Range, boolean and canonical-zero checks for a sign-magnitude input.
void constrain_fixed_input(CircuitBuilder& cb, SignedWire a, const std::string& name);

/// The signed value mag - 2*sign*mag as a linear combination; allocates the
/// sign*mag product wire.
Lc signed_value(CircuitBuilder& cb, SignedWire a, const std::string& name);

}  // namespace zkfl::circuit
