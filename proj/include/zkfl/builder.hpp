#pragma once

#include <string>
#include <variant>
#include <vector>

#include "zkfl/r1cs.hpp"

namespace zkfl::circuit {

// Witness hints: how an honest prover fills each non-input wire. They run in
// allocation order, so every hint only reads wires assigned before it.

struct ProductHint {
  LinearCombination a;
  LinearCombination b;
  Var out;
};

/// Little-endian bits of an integer value; fails if it needs more bits.
struct BitsHint {
  LinearCombination value;
  Var first;
  std::uint32_t count;
};

struct DivModHint {
  LinearCombination value;
  std::uint64_t divisor;
  Var quotient;
  Var remainder;
};

struct NonZeroHint {
  LinearCombination value;
  Var inverse;
  Var flag;
};

/// Splits a field element read as a signed integer into (|v|, v < 0).
struct SignMagnitudeHint {
  LinearCombination value;
  Var magnitude;
  Var sign;
};

using Hint = std::variant<ProductHint, BitsHint, DivModHint, NonZeroHint, SignMagnitudeHint>;

class WitnessProgram {
 public:
  void push(Hint h) { hints_.push_back(std::move(h)); }
  std::size_t size() const { return hints_.size(); }

  /// Fills every hinted wire of z. Throws OverflowError if a value does not fit
  /// the range its gadget allows.
  void run(std::span<FieldElement> z, const ConstraintSystem& cs) const;

 private:
  std::vector<Hint> hints_;
};

/// Protoboard: allocates wires, records constraints and the hints that
/// satisfy them.
class CircuitBuilder {
 public:
  CircuitBuilder(PrimeField field, CircuitShape shape) : cs_(std::move(field), shape) {}

  const PrimeField& field() const { return cs_.field(); }
  const CircuitShape& shape() const { return cs_.shape(); }
  const fx::FxConfig& fx() const { return cs_.shape().fx; }

  Var allocate(std::string name) { return allocate_block(std::move(name), 1); }
  Var allocate_block(std::string name, std::uint32_t count);

  /// Everything allocated so far becomes a public input.
  void end_public_inputs();

  void enforce(const Lc& a, const Lc& b, const Lc& c);
  void hint(Hint h) { program_.push(std::move(h)); }

  LinearCombination lower(const Lc& lc) const { return circuit::lower(lc, field()); }

  std::size_t num_constraints() const { return cs_.num_constraints(); }

  struct Compiled {
    ConstraintSystem system;
    WitnessProgram program;
  };
  Compiled finish() &&;

 private:
  void append(const Lc& lc);

  ConstraintSystem cs_;
  WitnessProgram program_;
  bool public_closed_ = false;
};

}  // namespace zkfl::circuit
