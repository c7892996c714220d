#include "zkfl/proof.hpp"

#include <cstring>

#include "bytes.hpp"
#include "zkfl/errors.hpp"

namespace zkfl::circuit {

namespace {

constexpr char kKeyMagic[8] = {'Z', 'K', 'F', 'L', 'K', 'E', 'Y', 'S'};
constexpr std::uint32_t kKeyVersion = 1;

KeyPair transparent_setup(std::string_view id, std::shared_ptr<const ConstraintSystem> cs) {
  if (!cs) throw ConfigError("setup requires a constraint system");
  KeyPair keys;
  keys.proving_key = {std::string(id), cs->digest()};
  keys.verification_key = {std::string(id), cs->digest(), std::move(cs)};
  return keys;
}

void check_proving_key(std::string_view id, const ConstraintSystem& cs, const ProvingKey& pk) {
  if (pk.backend != id) throw ConfigError("proving key belongs to backend '" + pk.backend + "'");
  if (pk.cs_digest != cs.digest()) throw DigestMismatch("proving key does not match the constraint system");
}

// Shared front half of verification: backend, digest and public-input echo.
VerifyStatus check_envelope(std::string_view id, const VerificationKey& vk, std::span<const FieldElement> public_inputs,
                            const Proof& proof) {
  if (proof.backend != id || vk.backend != id) return VerifyStatus::kBackendMismatch;
  if (!vk.system || vk.cs_digest != vk.system->digest() || proof.cs_digest != vk.cs_digest) {
    return VerifyStatus::kDigestMismatch;
  }
  if (public_inputs.size() != vk.system->num_public()) return VerifyStatus::kPublicInputMismatch;
  if (proof.public_inputs.size() != public_inputs.size() ||
      !std::equal(public_inputs.begin(), public_inputs.end(), proof.public_inputs.begin())) {
    return VerifyStatus::kPublicInputMismatch;
  }
  return VerifyStatus::kAccepted;
}

std::vector<FieldElement> public_part(const ConstraintSystem& cs, const Witness& witness) {
  if (witness.values.size() != cs.num_variables()) throw ConfigError("witness length does not match the system");
  return {witness.values.begin() + 1, witness.values.begin() + 1 + cs.num_public()};
}

}  // namespace

std::string_view to_string(VerifyStatus s) {
  switch (s) {
    case VerifyStatus::kAccepted:
      return "accepted";
    case VerifyStatus::kBackendMismatch:
      return "backend_mismatch";
    case VerifyStatus::kDigestMismatch:
      return "digest_mismatch";
    case VerifyStatus::kPublicInputMismatch:
      return "public_input_mismatch";
    case VerifyStatus::kMalformedProof:
      return "malformed_proof";
    case VerifyStatus::kConstraintViolated:
      return "constraint_violated";
  }
  return "unknown";
}

std::vector<std::uint8_t> pack_elements(std::span<const FieldElement> elements) {
  std::vector<std::uint8_t> out(elements.size() * 16);
  std::uint8_t* p = out.data();
  for (const auto& e : elements) {
    for (int i = 0; i < 16; ++i) *p++ = static_cast<std::uint8_t>(e.value >> (8 * i));
  }
  return out;
}

std::vector<FieldElement> unpack_elements(std::span<const std::uint8_t> bytes, const PrimeField& field) {
  if (bytes.size() % 16 != 0) throw MalformedProof("payload length is not a multiple of 16");
  std::vector<FieldElement> out(bytes.size() / 16);
  const std::uint8_t* p = bytes.data();
  for (auto& e : out) {
    u128 v = 0;
    for (int i = 0; i < 16; ++i) v |= static_cast<u128>(*p++) << (8 * i);
    if (v >= field.modulus()) throw MalformedProof("payload element outside the field");
    e.value = v;
  }
  return out;
}

KeyPair WitnessReplayBackend::setup(std::shared_ptr<const ConstraintSystem> cs) const {
  return transparent_setup(kId, std::move(cs));
}

Proof WitnessReplayBackend::prove(const ConstraintSystem& cs, const Witness& witness, const ProvingKey& pk) const {
  check_proving_key(kId, cs, pk);
  return {std::string(kId), cs.digest(), public_part(cs, witness), pack_elements(witness.values)};
}

VerifyStatus WitnessReplayBackend::check(const VerificationKey& vk, std::span<const FieldElement> public_inputs,
                                         const Proof& proof) const {
  if (auto s = check_envelope(kId, vk, public_inputs, proof); s != VerifyStatus::kAccepted) return s;
  const ConstraintSystem& cs = *vk.system;
  std::vector<FieldElement> z;
  try {
    z = unpack_elements(proof.payload, cs.field());
  } catch (const MalformedProof&) {
    return VerifyStatus::kMalformedProof;
  }
  if (z.size() != cs.num_variables()) return VerifyStatus::kMalformedProof;
  if (!std::equal(public_inputs.begin(), public_inputs.end(), z.begin() + 1)) {
    return VerifyStatus::kPublicInputMismatch;
  }
  return cs.is_satisfied(z) ? VerifyStatus::kAccepted : VerifyStatus::kConstraintViolated;
}

KeyPair PrivateReplayBackend::setup(std::shared_ptr<const ConstraintSystem> cs) const {
  return transparent_setup(kId, std::move(cs));
}

Proof PrivateReplayBackend::prove(const ConstraintSystem& cs, const Witness& witness, const ProvingKey& pk) const {
  check_proving_key(kId, cs, pk);
  auto pub = public_part(cs, witness);
  const std::span<const FieldElement> priv(witness.values.begin() + 1 + cs.num_public(), witness.values.end());
  return {std::string(kId), cs.digest(), std::move(pub), pack_elements(priv)};
}

VerifyStatus PrivateReplayBackend::check(const VerificationKey& vk, std::span<const FieldElement> public_inputs,
                                         const Proof& proof) const {
  if (auto s = check_envelope(kId, vk, public_inputs, proof); s != VerifyStatus::kAccepted) return s;
  const ConstraintSystem& cs = *vk.system;
  std::vector<FieldElement> priv;
  try {
    priv = unpack_elements(proof.payload, cs.field());
  } catch (const MalformedProof&) {
    return VerifyStatus::kMalformedProof;
  }
  if (priv.size() + 1 + cs.num_public() != cs.num_variables()) return VerifyStatus::kMalformedProof;
  std::vector<FieldElement> z;
  z.reserve(cs.num_variables());
  z.push_back(cs.field().one());
  z.insert(z.end(), public_inputs.begin(), public_inputs.end());
  z.insert(z.end(), priv.begin(), priv.end());
  return cs.is_satisfied(z) ? VerifyStatus::kAccepted : VerifyStatus::kConstraintViolated;
}

const ProofBackend& backend_by_id(std::string_view id) {
  static const WitnessReplayBackend replay;
  static const PrivateReplayBackend private_replay;
  if (id == WitnessReplayBackend::kId) return replay;
  if (id == PrivateReplayBackend::kId) return private_replay;
  throw ConfigError("unknown proof backend '" + std::string(id) + "'");
}

std::vector<std::string_view> backend_ids() { return {WitnessReplayBackend::kId, PrivateReplayBackend::kId}; }

nlohmann::json proof_to_json(const Proof& proof, const PrimeField& field) {
  nlohmann::json pub = nlohmann::json::array();
  for (const auto& e : proof.public_inputs) pub.push_back(field.to_decimal(e));
  return {{"backend", proof.backend},
          {"cs_digest", to_hex(proof.cs_digest)},
          {"public_inputs", std::move(pub)},
          {"payload", base64_encode(proof.payload)}};
}

Proof proof_from_json(const nlohmann::json& j, const PrimeField& field) {
  try {
    Proof p;
    p.backend = j.at("backend").get<std::string>();
    const auto digest = from_hex(j.at("cs_digest").get<std::string>());
    if (digest.size() != p.cs_digest.size()) throw MalformedProof("digest has wrong length");
    std::copy(digest.begin(), digest.end(), p.cs_digest.begin());
    for (const auto& e : j.at("public_inputs")) p.public_inputs.push_back(field.parse_decimal(e.get<std::string>()));
    p.payload = base64_decode(j.at("payload").get<std::string>());
    return p;
  } catch (const MalformedProof&) {
    throw;
  } catch (const std::exception& e) {
    throw MalformedProof(std::string("malformed proof JSON: ") + e.what());
  }
}

std::size_t proof_json_size(const Proof& proof, const PrimeField& field) {
  Proof shell = proof;
  shell.payload.clear();
  return proof_to_json(shell, field).dump().size() + base64_length(proof.payload.size());
}

std::vector<std::uint8_t> serialize_keypair(const KeyPair& keys) {
  const auto& vk = keys.verification_key;
  if (!vk.system) throw ConfigError("verification key has no embedded constraint system");
  if (keys.proving_key.backend != vk.backend || keys.proving_key.cs_digest != vk.cs_digest) {
    throw DigestMismatch("proving and verification keys do not belong together");
  }
  detail::ByteWriter w;
  w.bytes(std::span(reinterpret_cast<const std::uint8_t*>(kKeyMagic), sizeof kKeyMagic));
  w.u32(kKeyVersion);
  w.str(vk.backend);
  w.bytes(vk.cs_digest);
  const auto body = vk.system->serialize();
  w.u64(body.size());
  w.bytes(body);
  return std::move(w.buffer());
}

KeyPair deserialize_keypair(std::span<const std::uint8_t> bytes) {
  detail::ByteReader r(bytes);
  const auto magic = r.bytes(sizeof kKeyMagic);
  if (std::memcmp(magic.data(), kKeyMagic, sizeof kKeyMagic) != 0) r.fail("not a key file");
  if (r.u32() != kKeyVersion) r.fail("unsupported key file version");
  const auto backend = r.str();
  Sha256 digest{};
  const auto d = r.bytes(digest.size());
  std::copy(d.begin(), d.end(), digest.begin());
  auto cs = std::make_shared<const ConstraintSystem>(ConstraintSystem::deserialize(r.bytes(r.u64())));
  if (!r.at_end()) r.fail("trailing bytes in key file");
  if (cs->digest() != digest) throw DigestMismatch("key digest does not match embedded constraint system");
  backend_by_id(backend);
  KeyPair keys;
  keys.proving_key = {backend, digest};
  keys.verification_key = {backend, digest, std::move(cs)};
  return keys;
}

}  // namespace zkfl::circuit
