#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "zkfl/proof.hpp"

namespace zkfl::ledger {

using Address = std::string;

/// Stand-in for gas: cost = base + per_byte * |tx JSON| + per_constraint * constraints checked.
struct CostModel {
  std::uint64_t base = 21000;
  std::uint64_t per_byte = 16;
  std::uint64_t per_constraint = 3;

  friend bool operator==(const CostModel&, const CostModel&) = default;
};

struct DeployConfig {
  nn::Hyperparams hp;
  fx::FxConfig fx;
  circuit::VerificationKey verification_key;
  std::uint64_t cycle_length_blocks = 100;
  /// Zero weights and biases when absent.
  std::optional<nn::Model> initial_model;
  std::vector<Address> accounts;
  CostModel cost;
};

struct UpdateTx {
  Address sender;
  nn::Model local_model{1, 1};
  circuit::Proof proof;
  std::string old_model_digest;  // hex SHA-256 of the global model trained against
};

enum class RejectReason {
  kUnregistered,
  kDuplicateInCycle,
  kMalformed,
  kStaleModel,
  kInvalidProof,
};

std::string_view to_string(RejectReason r);

struct SubmitResult {
  std::uint64_t tx_id = 0;
  std::optional<RejectReason> rejection;  // empty on accept
  std::uint64_t cost = 0;

  bool accepted() const { return !rejection.has_value(); }
};

struct CostEntry {
  std::uint64_t tx_id;
  std::uint64_t cost;
};

struct LedgerState {
  std::uint64_t block_height = 0;
  std::set<Address> registered;
  nn::Model committed_model{1, 1};
  nn::Model temp_model{1, 1};
  std::map<Address, bool> updates_this_cycle;
  std::uint64_t cycle_index = 0;
  std::uint64_t cycle_start_block = 0;
  std::uint64_t cycle_length_blocks = 100;
  std::uint64_t update_count_this_cycle = 0;
  std::vector<CostEntry> cost_log;
};

/// The learning contract with its verifier: a single-writer state machine.
/// Every mutation goes through submit_update / advance_block, and replicas fed
/// the same call sequence end in identical states.
class LearningContract {
 public:
  /// Throws ConfigError on an empty account list, a key for another circuit
  /// shape, or a zero cycle length.
  static LearningContract deploy(DeployConfig config);

  /// Never throws; malformed or unauthorised submissions come back as rejections.
  SubmitResult submit_update(const UpdateTx& tx);

  /// Moves the block height forward and closes every cycle whose boundary was
  /// crossed, in order.
  void advance_block(std::uint64_t k);

  /// Blocks left until the open cycle's boundary.
  std::uint64_t blocks_until_boundary() const;

  /// Closes the open cycle. Throws Error if its boundary has not been reached.
  void finalize_cycle();

  /// The committed global model and the current cycle index. Never exposes the
  /// in-progress aggregate.
  std::pair<nn::Model, std::uint64_t> read_global() const;

  std::uint64_t estimate_cost(const UpdateTx& tx) const;

  const LedgerState& state() const { return state_; }
  const fx::FxConfig& fx() const { return fx_; }
  const nn::Hyperparams& hyperparams() const { return hp_; }
  const std::string& committed_digest() const { return committed_digest_; }

  /// Events appended since deploy, one JSON object per accept/reject/finalize.
  const std::vector<nlohmann::json>& events() const { return events_; }

  nlohmann::json snapshot() const;
  std::string state_digest() const;

  /// Test hook: skip proof verification, to demonstrate that it is load-bearing.
  void disable_verification_for_testing() { verify_proofs_ = false; }

 private:
  LearningContract(DeployConfig config, std::set<Address> registered, nn::Model initial);

  std::uint64_t cost_for(const UpdateTx& tx, std::size_t constraints_checked) const;
  void fold_into_temp(const nn::Model& local);
  void log(std::uint64_t tx_id, const UpdateTx& tx, const SubmitResult& r);

  nn::Hyperparams hp_;
  fx::FxConfig fx_;
  circuit::VerificationKey vk_;
  const circuit::ProofBackend* backend_;
  CostModel cost_model_;
  LedgerState state_;
  std::string committed_digest_;
  std::uint64_t next_tx_id_ = 0;
  std::vector<nlohmann::json> events_;
  bool verify_proofs_ = true;
};

/// {sender, model, proof, old_digest}
nlohmann::json tx_to_json(const UpdateTx& tx, const fx::FxConfig& cfg, const circuit::PrimeField& field);
UpdateTx tx_from_json(const nlohmann::json& j, const fx::FxConfig& cfg, const circuit::PrimeField& field);
/// Exact byte length of tx_to_json(tx).dump().
std::size_t tx_json_size(const UpdateTx& tx, const fx::FxConfig& cfg, const circuit::PrimeField& field);

/// Deterministic account address for the i-th participant.
Address account_address(std::size_t index);

}  // namespace zkfl::ledger
