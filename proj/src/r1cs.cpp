#include "zkfl/r1cs.hpp"

#include <algorithm>
#include <cstring>

#include "bytes.hpp"
#include "zkfl/errors.hpp"

namespace zkfl::circuit {

namespace {

constexpr char kMagic[8] = {'Z', 'K', 'F', 'L', 'R', '1', 'C', 'S'};

FieldElement to_field(i128 c, const PrimeField& field) {
  const u128 p = field.modulus();
  if (c >= 0) return {static_cast<u128>(c) % p};
  const u128 mag = static_cast<u128>(-(c + 1)) + 1;
  return field.neg({mag % p});
}

// Coefficients are mostly small positive or small negative integers; the tag in
// the low two bits picks the encoding.
void put_coeff(detail::ByteWriter& w, FieldElement c, const PrimeField& field) {
  constexpr u128 kSmall = u128{1} << 61;
  if (c.value < kSmall) {
    w.varint(static_cast<std::uint64_t>(c.value) << 2);
  } else if (field.modulus() - c.value < kSmall) {
    w.varint(static_cast<std::uint64_t>(field.modulus() - c.value) << 2 | 1);
  } else {
    w.varint(2);
    w.u128(c.value);
  }
}

FieldElement get_coeff(detail::ByteReader& r, const PrimeField& field) {
  const std::uint64_t v = r.varint();
  switch (v & 3) {
    case 0:
      return field.from_u64(v >> 2);
    case 1:
      return field.neg(field.from_u64(v >> 2));
    case 2: {
      const u128 raw = r.u128();
      if (raw >= field.modulus()) r.fail("coefficient out of range");
      return {raw};
    }
    default:
      r.fail("bad coefficient tag");
  }
}

}  // namespace

LinearCombination lower(const Lc& lc, const PrimeField& field) {
  LinearCombination out;
  out.reserve(lc.terms().size());
  for (const auto& t : lc.terms()) out.push_back(Term::make(t.var, to_field(t.coeff, field)));
  std::sort(out.begin(), out.end(), [](const Term& x, const Term& y) { return x.var < y.var; });
  LinearCombination merged;
  merged.reserve(out.size());
  for (const auto& t : out) {
    if (!merged.empty() && merged.back().var == t.var) {
      merged.back() = Term::make(t.var, field.add(merged.back().coeff(), t.coeff()));
    } else {
      merged.push_back(t);
    }
  }
  std::erase_if(merged, [](const Term& t) { return t.coeff_lo == 0 && t.coeff_hi == 0; });
  return merged;
}

FieldElement evaluate(std::span<const Term> lc, std::span<const FieldElement> z, const PrimeField& field) {
  const u128 minus_one = field.modulus() - 1;
  FieldElement acc = field.zero();
  for (const auto& t : lc) {
    const FieldElement c = t.coeff();
    const FieldElement v = z[t.var];
    if (c.value == 1) {
      acc = field.add(acc, v);
    } else if (c.value == minus_one) {
      acc = field.sub(acc, v);
    } else {
      acc = field.add(acc, field.mul(c, v));
    }
  }
  return acc;
}

ConstraintSystem::ConstraintSystem(PrimeField field, CircuitShape shape) : field_(std::move(field)), shape_(shape) {}

const WireGroup* ConstraintSystem::group_of(Var v) const {
  // Groups are appended in allocation order, so `first` is ascending.
  auto it = std::upper_bound(manifest_.begin(), manifest_.end(), v,
                             [](Var x, const WireGroup& g) { return x < g.first; });
  if (it == manifest_.begin()) return nullptr;
  --it;
  return v < it->first + it->count ? &*it : nullptr;
}

std::optional<std::size_t> ConstraintSystem::first_violation(std::span<const FieldElement> z) const {
  if (z.size() != num_variables_ || z[kOneWire] != field_.one()) return 0;
  for (std::size_t i = 0; i < num_constraints(); ++i) {
    const FieldElement av = evaluate(a(i), z, field_);
    const FieldElement bv = evaluate(b(i), z, field_);
    const FieldElement cv = evaluate(c(i), z, field_);
    if (field_.mul(av, bv) != cv) return i;
  }
  return std::nullopt;
}

std::vector<std::uint8_t> ConstraintSystem::serialize_body() const {
  detail::ByteWriter w;
  w.u128(field_.modulus());
  w.varint(shape_.batch_size);
  w.varint(shape_.n_inputs);
  w.varint(shape_.n_classes);
  w.varint(shape_.fx.scale_bits);
  w.varint(shape_.fx.magnitude_bits);
  w.varint(num_variables_);
  w.varint(num_public_);
  w.varint(num_constraints());
  for (std::size_t k = 0; k + 1 < offsets_.size(); ++k) {
    const auto lc = slice(k);
    w.varint(lc.size());
    Var prev = 0;
    for (const auto& t : lc) {
      w.varint(t.var - prev);  // sorted, so deltas are non-negative
      prev = t.var;
      put_coeff(w, t.coeff(), field_);
    }
  }
  w.varint(manifest_.size());
  for (const auto& g : manifest_) {
    w.str(g.name);
    w.varint(g.first);
    w.varint(g.count);
  }
  return std::move(w.buffer());
}

void ConstraintSystem::seal() {
  const auto body = serialize_body();
  digest_ = sha256(body);
}

std::vector<std::uint8_t> ConstraintSystem::serialize() const {
  const auto body = serialize_body();
  detail::ByteWriter w;
  w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kMagic), sizeof kMagic));
  w.u32(kFormatVersion);
  w.bytes(digest_);
  w.u64(body.size());
  w.bytes(body);
  return std::move(w.buffer());
}

ConstraintSystem ConstraintSystem::deserialize(std::span<const std::uint8_t> bytes) {
  detail::ByteReader header(bytes);
  const auto magic = header.bytes(sizeof kMagic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) header.fail("not a constraint system file");
  if (header.u32() != kFormatVersion) header.fail("unsupported constraint system version");
  Sha256 stored{};
  const auto d = header.bytes(stored.size());
  std::copy(d.begin(), d.end(), stored.begin());
  const auto body = header.bytes(header.u64());
  if (!header.at_end()) header.fail("trailing bytes after constraint system");
  if (sha256(body) != stored) throw DigestMismatch("constraint system body does not match its digest");

  detail::ByteReader r(body);
  PrimeField field(r.u128());
  CircuitShape shape;
  shape.batch_size = static_cast<std::uint32_t>(r.varint());
  shape.n_inputs = static_cast<std::uint32_t>(r.varint());
  shape.n_classes = static_cast<std::uint32_t>(r.varint());
  shape.fx.scale_bits = static_cast<unsigned>(r.varint());
  shape.fx.magnitude_bits = static_cast<unsigned>(r.varint());
  ConstraintSystem cs(field, shape);
  cs.num_variables_ = static_cast<std::uint32_t>(r.varint());
  cs.num_public_ = static_cast<std::uint32_t>(r.varint());
  if (cs.num_public_ >= cs.num_variables_) r.fail("public input count exceeds variable count");
  const auto constraints = r.varint();
  cs.offsets_.reserve(3 * constraints + 1);
  for (std::uint64_t k = 0; k < 3 * constraints; ++k) {
    const auto n = r.varint();
    Var prev = 0;
    for (std::uint64_t t = 0; t < n; ++t) {
      const auto var = prev + r.varint();
      if (var >= cs.num_variables_) r.fail("constraint references an unknown wire");
      prev = static_cast<Var>(var);
      cs.terms_.push_back(Term::make(prev, get_coeff(r, field)));
    }
    cs.offsets_.push_back(static_cast<std::uint32_t>(cs.terms_.size()));
  }
  const auto groups = r.varint();
  for (std::uint64_t g = 0; g < groups; ++g) {
    WireGroup wg;
    wg.name = r.str();
    wg.first = static_cast<Var>(r.varint());
    wg.count = static_cast<std::uint32_t>(r.varint());
    cs.manifest_.push_back(std::move(wg));
  }
  if (!r.at_end()) r.fail("trailing bytes in constraint system body");
  cs.digest_ = stored;
  return cs;
}

nlohmann::json ConstraintSystem::manifest_json() const {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : manifest_) {
    groups.push_back({{"name", g.name}, {"first", g.first}, {"count", g.count},
                      {"visibility", g.first <= num_public_ && g.first != kOneWire ? "public" : "private"}});
  }
  return {{"digest", to_hex(digest_)},
          {"field_modulus", u128_to_decimal(field_.modulus())},
          {"batch_size", shape_.batch_size},
          {"n_inputs", shape_.n_inputs},
          {"n_classes", shape_.n_classes},
          {"scale_bits", shape_.fx.scale_bits},
          {"magnitude_bits", shape_.fx.magnitude_bits},
          {"num_variables", num_variables_},
          {"num_public", num_public_},
          {"num_constraints", num_constraints()},
          {"wires", std::move(groups)}};
}

}  // namespace zkfl::circuit
