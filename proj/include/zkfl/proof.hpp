#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zkfl/training_circuit.hpp"

namespace zkfl::circuit {

struct ProvingKey {
  std::string backend;
  Sha256 cs_digest{};
};

/// For the transparent backends the verification key embeds the constraint
/// system itself; verification replays every constraint.
struct VerificationKey {
  std::string backend;
  Sha256 cs_digest{};
  std::shared_ptr<const ConstraintSystem> system;
};

struct KeyPair {
  ProvingKey proving_key;
  VerificationKey verification_key;
};

struct Proof {
  std::string backend;
  Sha256 cs_digest{};
  std::vector<FieldElement> public_inputs;
  std::vector<std::uint8_t> payload;
};

enum class VerifyStatus {
  kAccepted,
  kBackendMismatch,
  kDigestMismatch,
  kPublicInputMismatch,
  kMalformedProof,
  kConstraintViolated,
};

std::string_view to_string(VerifyStatus s);

/// Proof system behind setup/prove/verify. Completeness and soundness tests are
/// written against this interface so every backend runs the same suite.
class ProofBackend {
 public:
  virtual ~ProofBackend() = default;

  virtual std::string_view id() const = 0;
  virtual bool is_zero_knowledge() const = 0;

  virtual KeyPair setup(std::shared_ptr<const ConstraintSystem> cs) const = 0;
  /// Throws DigestMismatch if the proving key belongs to another system.
  virtual Proof prove(const ConstraintSystem& cs, const Witness& witness, const ProvingKey& pk) const = 0;
  virtual VerifyStatus check(const VerificationKey& vk, std::span<const FieldElement> public_inputs,
                             const Proof& proof) const = 0;

  bool verify(const VerificationKey& vk, std::span<const FieldElement> public_inputs, const Proof& proof) const {
    return check(vk, public_inputs, proof) == VerifyStatus::kAccepted;
  }
};

/// Discloses the whole assignment; the verifier checks every constraint and
/// that the public wires equal the claimed public inputs. Sound, not
/// zero-knowledge.
class WitnessReplayBackend final : public ProofBackend {
 public:
  static constexpr std::string_view kId = "transparent-replay";
  std::string_view id() const override { return kId; }
  bool is_zero_knowledge() const override { return false; }
  KeyPair setup(std::shared_ptr<const ConstraintSystem> cs) const override;
  Proof prove(const ConstraintSystem& cs, const Witness& witness, const ProvingKey& pk) const override;
  VerifyStatus check(const VerificationKey& vk, std::span<const FieldElement> public_inputs,
                     const Proof& proof) const override;
};

/// Discloses only the private wires; the verifier splices in the claimed
/// public inputs before replaying the constraints.
class PrivateReplayBackend final : public ProofBackend {
 public:
  static constexpr std::string_view kId = "transparent-private";
  std::string_view id() const override { return kId; }
  bool is_zero_knowledge() const override { return false; }
  KeyPair setup(std::shared_ptr<const ConstraintSystem> cs) const override;
  Proof prove(const ConstraintSystem& cs, const Witness& witness, const ProvingKey& pk) const override;
  VerifyStatus check(const VerificationKey& vk, std::span<const FieldElement> public_inputs,
                     const Proof& proof) const override;
};

/// Throws ConfigError for an unknown id.
const ProofBackend& backend_by_id(std::string_view id);
std::vector<std::string_view> backend_ids();

// Proof payloads pack field elements as 16 little-endian bytes each.
std::vector<std::uint8_t> pack_elements(std::span<const FieldElement> elements);
/// Throws MalformedProof on a bad length or out-of-range element.
std::vector<FieldElement> unpack_elements(std::span<const std::uint8_t> bytes, const PrimeField& field);

/// {backend, cs_digest, public_inputs[decimal], payload(base64)}
nlohmann::json proof_to_json(const Proof& proof, const PrimeField& field);
/// Throws MalformedProof.
Proof proof_from_json(const nlohmann::json& j, const PrimeField& field);
/// Exact length of proof_to_json(proof).dump() without materialising the payload text.
std::size_t proof_json_size(const Proof& proof, const PrimeField& field);

/// Versioned binary key file: header, backend id, digest, embedded system.
std::vector<std::uint8_t> serialize_keypair(const KeyPair& keys);
KeyPair deserialize_keypair(std::span<const std::uint8_t> bytes);

}  // namespace zkfl::circuit
