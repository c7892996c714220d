#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "zkfl/ledger.hpp"
#include "zkfl/rng.hpp"

namespace zkfl::node {

enum class QueueMode {
  kBlock,  // enqueue waits for space
  kBalk,   // enqueue throws QueueFull
};

/// Bounded FIFO of training batches.
class BatchQueue {
 public:
  BatchQueue(std::size_t capacity, QueueMode mode);

  void push(nn::Batch batch);
  std::optional<nn::Batch> try_pop();
  std::size_t size() const;
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  QueueMode mode_;
  mutable std::mutex mutex_;
  std::condition_variable space_;
  std::deque<nn::Batch> items_;
};

enum class ByzantineMode {
  kHonest,
  kCorruptModel,    // perturb one weight after proving
  kCorruptWitness,  // perturb one private wire before proving
  kReplayProof,     // resend the previous cycle's transaction
};

std::string_view to_string(ByzantineMode mode);
/// Accepts corrupt_model, corrupt_witness, replay_proof, honest. Throws ConfigError.
ByzantineMode parse_byzantine_mode(std::string_view text);

struct CycleReport {
  std::uint64_t cycle = 0;
  ledger::Address address;
  bool submitted = false;
  bool accepted = false;
  std::optional<std::string> skipped;  // no_batch, already_submitted, nothing_to_replay
  std::optional<ledger::RejectReason> rejection;
  std::uint64_t tx_id = 0;
  std::uint64_t cost = 0;
  double witness_ms = 0.0;
  double prove_ms = 0.0;

  nlohmann::json to_json() const;
};

/// A transaction built against one observed cycle, not yet submitted.
struct PreparedTx {
  std::uint64_t cycle = 0;
  ledger::UpdateTx tx;
  double witness_ms = 0.0;
  double prove_ms = 0.0;
};

struct NodeConfig {
  ledger::Address address;
  std::size_t queue_capacity = 16;
  QueueMode queue_mode = QueueMode::kBlock;
  ByzantineMode mode = ByzantineMode::kHonest;
  std::uint64_t seed = 0;
};

/// Off-chain learning node: pulls a batch, trains against the committed global
/// model inside the circuit, proves, and submits at most once per cycle.
class LearningNode {
 public:
  LearningNode(NodeConfig config, std::shared_ptr<const circuit::TrainingCircuit> circuit,
               circuit::ProvingKey proving_key, const nn::Hyperparams& hp);

  const ledger::Address& address() const { return config_.address; }
  ByzantineMode mode() const { return config_.mode; }

  /// Throws ConfigError on a shape mismatch, QueueFull when balking.
  void enqueue_batch(nn::Batch batch);
  std::size_t pending() const { return inbox_.size(); }

  /// Read-only against the ledger, so several nodes may prepare concurrently.
  /// Returns a skip report when there is nothing to send this cycle.
  std::variant<PreparedTx, CycleReport> prepare(const ledger::LearningContract& ledger);
  CycleReport submit(PreparedTx prepared, ledger::LearningContract& ledger);
  CycleReport run_cycle(ledger::LearningContract& ledger);

  std::optional<std::uint64_t> last_seen_cycle() const { return last_seen_cycle_; }

 private:
  NodeConfig config_;
  std::shared_ptr<const circuit::TrainingCircuit> circuit_;
  circuit::ProvingKey proving_key_;
  const circuit::ProofBackend* backend_;
  nn::Hyperparams hp_;
  BatchQueue inbox_;
  Rng rng_;
  std::optional<std::uint64_t> last_seen_cycle_;
  std::optional<ledger::UpdateTx> previous_tx_;
};

}  // namespace zkfl::node
