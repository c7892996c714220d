#include "zkfl/builder.hpp"

#include "zkfl/errors.hpp"

namespace zkfl::circuit {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

std::string wire_name(const ConstraintSystem& cs, Var v) {
  const auto* g = cs.group_of(v);
  return g ? g->name : "wire " + std::to_string(v);
}

}  // namespace

void WitnessProgram::run(std::span<FieldElement> z, const ConstraintSystem& cs) const {
  const PrimeField& field = cs.field();
  for (const auto& hint : hints_) {
    std::visit(Overloaded{
                   [&](const ProductHint& h) { z[h.out] = field.mul(evaluate(h.a, z, field), evaluate(h.b, z, field)); },
                   [&](const BitsHint& h) {
                     const u128 v = evaluate(h.value, z, field).value;
                     if (h.count < 128 && (v >> h.count) != 0) {
                       throw OverflowError(wire_name(cs, h.first) + ": value needs more than " +
                                           std::to_string(h.count) + " bits");
                     }
                     for (std::uint32_t i = 0; i < h.count; ++i) z[h.first + i] = {(v >> i) & 1};
                   },
                   [&](const DivModHint& h) {
                     const u128 v = evaluate(h.value, z, field).value;
                     z[h.quotient] = {v / h.divisor};
                     z[h.remainder] = {v % h.divisor};
                   },
                   [&](const NonZeroHint& h) {
                     const FieldElement v = evaluate(h.value, z, field);
                     z[h.inverse] = field.inverse(v);
                     z[h.flag] = {v.value != 0 ? u128{1} : u128{0}};
                   },
                   [&](const SignMagnitudeHint& h) {
                     const FieldElement v = evaluate(h.value, z, field);
                     const bool negative = field.is_negative(v);
                     z[h.magnitude] = negative ? field.neg(v) : v;
                     z[h.sign] = {negative ? u128{1} : u128{0}};
                   },
               },
               hint);
  }
}

Var CircuitBuilder::allocate_block(std::string name, std::uint32_t count) {
  const Var first = cs_.num_variables_;
  cs_.num_variables_ += count;
  cs_.manifest_.push_back({std::move(name), first, count});
  return first;
}

void CircuitBuilder::end_public_inputs() {
  if (public_closed_) throw Error("public inputs already closed");
  cs_.num_public_ = cs_.num_variables_ - 1;
  public_closed_ = true;
}

void CircuitBuilder::append(const Lc& lc) {
  const auto lowered = lower(lc);
  cs_.terms_.insert(cs_.terms_.end(), lowered.begin(), lowered.end());
  cs_.offsets_.push_back(static_cast<std::uint32_t>(cs_.terms_.size()));
}

void CircuitBuilder::enforce(const Lc& a, const Lc& b, const Lc& c) {
  append(a);
  append(b);
  append(c);
}

CircuitBuilder::Compiled CircuitBuilder::finish() && {
  if (!public_closed_) end_public_inputs();
  cs_.seal();
  return {std::move(cs_), std::move(program_)};
}

}  // namespace zkfl::circuit
