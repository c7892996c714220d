#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "zkfl/digest.hpp"
#include "zkfl/field.hpp"
#include "zkfl/fixedpoint.hpp"

namespace zkfl::circuit {

using Var = std::uint32_t;
using i128 = __int128;

/// Index 0 of every assignment is the constant-one wire.
inline constexpr Var kOneWire = 0;

/// Linear combination under construction. Coefficients are small signed
/// integers until the combination is lowered into a specific field.
class Lc {
 public:
  struct Term {
    Var var;
    i128 coeff;
  };

  Lc() = default;
  Lc(Var v) : terms_{{v, 1}} {}  // NOLINT(google-explicit-constructor)

  static Lc constant(i128 c) {
    Lc r;
    if (c != 0) r.terms_.push_back({kOneWire, c});
    return r;
  }

  Lc& add(Var v, i128 coeff) {
    if (coeff != 0) terms_.push_back({v, coeff});
    return *this;
  }

  Lc& operator+=(const Lc& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    return *this;
  }
  Lc& operator-=(const Lc& o) {
    for (const auto& t : o.terms_) terms_.push_back({t.var, -t.coeff});
    return *this;
  }
  Lc& operator*=(i128 s) {
    for (auto& t : terms_) t.coeff *= s;
    return *this;
  }

  friend Lc operator+(Lc a, const Lc& b) { return a += b; }
  friend Lc operator-(Lc a, const Lc& b) { return a -= b; }
  friend Lc operator*(i128 s, Lc a) { return a *= s; }

  const std::vector<Term>& terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

/// One term of a lowered linear combination.
struct Term {
  std::uint64_t coeff_lo = 0;
  std::uint64_t coeff_hi = 0;
  Var var = 0;

  FieldElement coeff() const { return {(static_cast<u128>(coeff_hi) << 64) | coeff_lo}; }
  static Term make(Var v, FieldElement c) {
    return {static_cast<std::uint64_t>(c.value), static_cast<std::uint64_t>(c.value >> 64), v};
  }
};

/// Lowered combination: sorted by variable, duplicates merged, zeros dropped.
using LinearCombination = std::vector<Term>;

LinearCombination lower(const Lc& lc, const PrimeField& field);

FieldElement evaluate(std::span<const Term> lc, std::span<const FieldElement> z, const PrimeField& field);

/// Named contiguous wire range in the layout manifest.
struct WireGroup {
  std::string name;
  Var first = 0;
  std::uint32_t count = 0;
};

/// Shape parameters the training circuit was compiled for.
struct CircuitShape {
  std::uint32_t batch_size = 0;
  std::uint32_t n_inputs = 0;
  std::uint32_t n_classes = 0;
  fx::FxConfig fx;

  friend bool operator==(const CircuitShape&, const CircuitShape&) = default;
};

/// Rank-1 constraint system <A,z> * <B,z> = <C,z>. Public inputs occupy wires
/// 1..num_public; everything after them is private.
class ConstraintSystem {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  ConstraintSystem(PrimeField field, CircuitShape shape);

  const PrimeField& field() const { return field_; }
  const CircuitShape& shape() const { return shape_; }

  std::uint32_t num_variables() const { return num_variables_; }
  std::uint32_t num_public() const { return num_public_; }
  std::size_t num_constraints() const { return (offsets_.size() - 1) / 3; }
  std::size_t num_terms() const { return terms_.size(); }

  std::span<const Term> a(std::size_t i) const { return slice(3 * i); }
  std::span<const Term> b(std::size_t i) const { return slice(3 * i + 1); }
  std::span<const Term> c(std::size_t i) const { return slice(3 * i + 2); }

  const std::vector<WireGroup>& manifest() const { return manifest_; }
  /// Manifest entry containing the given wire, if any.
  const WireGroup* group_of(Var v) const;

  /// Content digest over the serialized body (everything but the header).
  const Sha256& digest() const { return digest_; }

  bool is_satisfied(std::span<const FieldElement> z) const { return !first_violation(z).has_value(); }
  std::optional<std::size_t> first_violation(std::span<const FieldElement> z) const;

  std::vector<std::uint8_t> serialize() const;
  /// Throws FormatError on a bad header and DigestMismatch on a corrupted body.
  static ConstraintSystem deserialize(std::span<const std::uint8_t> bytes);

  nlohmann::json manifest_json() const;

 private:
  friend class CircuitBuilder;

  std::span<const Term> slice(std::size_t k) const {
    return std::span(terms_).subspan(offsets_[k], offsets_[k + 1] - offsets_[k]);
  }
  std::vector<std::uint8_t> serialize_body() const;
  void seal();

  PrimeField field_;
  CircuitShape shape_;
  std::uint32_t num_variables_ = 1;
  std::uint32_t num_public_ = 0;
  std::vector<Term> terms_;
  std::vector<std::uint32_t> offsets_{0};
  std::vector<WireGroup> manifest_;
  Sha256 digest_{};
};

}  // namespace zkfl::circuit
