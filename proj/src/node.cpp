#include "zkfl/node.hpp"

#include <chrono>

#include "zkfl/errors.hpp"

namespace zkfl::node {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

CycleReport skip(std::uint64_t cycle, const ledger::Address& address, std::string reason) {
  CycleReport r;
  r.cycle = cycle;
  r.address = address;
  r.skipped = std::move(reason);
  return r;
}

}  // namespace

BatchQueue::BatchQueue(std::size_t capacity, QueueMode mode) : capacity_(capacity), mode_(mode) {
  if (capacity == 0) throw ConfigError("queue capacity must be at least one");
}

void BatchQueue::push(nn::Batch batch) {
  std::unique_lock lock(mutex_);
  if (items_.size() >= capacity_) {
    if (mode_ == QueueMode::kBalk) throw QueueFull("batch queue full");
    space_.wait(lock, [&] { return items_.size() < capacity_; });
  }
  items_.push_back(std::move(batch));
}

std::optional<nn::Batch> BatchQueue::try_pop() {
  std::optional<nn::Batch> out;
  {
    std::lock_guard lock(mutex_);
    if (items_.empty()) return out;
    out = std::move(items_.front());
    items_.pop_front();
  }
  space_.notify_one();
  return out;
}

std::size_t BatchQueue::size() const {
  std::lock_guard lock(mutex_);
  return items_.size();
}

std::string_view to_string(ByzantineMode mode) {
  switch (mode) {
    case ByzantineMode::kHonest:
      return "honest";
    case ByzantineMode::kCorruptModel:
      return "corrupt_model";
    case ByzantineMode::kCorruptWitness:
      return "corrupt_witness";
    case ByzantineMode::kReplayProof:
      return "replay_proof";
  }
  return "unknown";
}

ByzantineMode parse_byzantine_mode(std::string_view text) {
  for (auto m : {ByzantineMode::kHonest, ByzantineMode::kCorruptModel, ByzantineMode::kCorruptWitness,
                 ByzantineMode::kReplayProof}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown byzantine mode: " + std::string(text));
}

nlohmann::json CycleReport::to_json() const {
  nlohmann::json j = {{"cycle", cycle},   {"address", address},       {"submitted", submitted},
                      {"accepted", accepted}, {"witness_ms", witness_ms}, {"prove_ms", prove_ms}};
  if (submitted) {
    j["tx"] = tx_id;
    j["cost"] = cost;
  }
  if (skipped) j["skipped"] = *skipped;
  if (rejection) j["reason"] = ledger::to_string(*rejection);
  return j;
}

LearningNode::LearningNode(NodeConfig config, std::shared_ptr<const circuit::TrainingCircuit> circuit,
                           circuit::ProvingKey proving_key, const nn::Hyperparams& hp)
    : config_(std::move(config)),
      circuit_(std::move(circuit)),
      proving_key_(std::move(proving_key)),
      backend_(&circuit::backend_by_id(proving_key_.backend)),
      hp_(hp),
      inbox_(config_.queue_capacity, config_.queue_mode),
      rng_(Rng::substream(config_.seed, "node", std::hash<std::string>{}(config_.address))) {}

void LearningNode::enqueue_batch(nn::Batch batch) {
  nn::validate_batch(batch, hp_);
  inbox_.push(std::move(batch));
}

std::variant<PreparedTx, CycleReport> LearningNode::prepare(const ledger::LearningContract& ledger) {
  auto [global, cycle] = ledger.read_global();
  if (last_seen_cycle_ && cycle <= *last_seen_cycle_) return skip(cycle, address(), "already_submitted");
  auto batch = inbox_.try_pop();
  if (!batch) return skip(cycle, address(), "no_batch");
  last_seen_cycle_ = cycle;

  const auto& cs = circuit_->system();
  const auto alpha = hp_.alpha_eff();
  PreparedTx out;
  out.cycle = cycle;

  auto t0 = Clock::now();
  auto result = circuit_->compute_witness(global, alpha, *batch);
  out.witness_ms = ms_since(t0);

  if (config_.mode == ByzantineMode::kCorruptWitness) {
    const auto first_private = 1 + cs.num_public();
    const auto idx = first_private + rng_.below(cs.num_variables() - first_private);
    auto& v = result.witness.values[idx];
    v = cs.field().add(v, cs.field().one());
  }

  t0 = Clock::now();
  auto proof = backend_->prove(cs, result.witness, proving_key_);
  out.prove_ms = ms_since(t0);

  out.tx = ledger::UpdateTx{address(), std::move(result.updated), std::move(proof), ledger.committed_digest()};

  if (config_.mode == ByzantineMode::kCorruptModel) {
    const auto e = rng_.below(out.tx.local_model.weights().size());
    auto& w = out.tx.local_model.weights()[e];
    w = fx::fx_add(w, fx::encode(10.0, circuit_->fx()), circuit_->fx());
  }
  if (config_.mode == ByzantineMode::kReplayProof) {
    auto previous = std::exchange(previous_tx_, out.tx);
    if (!previous) return skip(cycle, address(), "nothing_to_replay");
    out.tx = std::move(*previous);
  }
  return out;
}

CycleReport LearningNode::submit(PreparedTx prepared, ledger::LearningContract& ledger) {
  const auto r = ledger.submit_update(prepared.tx);
  CycleReport report;
  report.cycle = prepared.cycle;
  report.address = address();
  report.submitted = true;
  report.accepted = r.accepted();
  report.rejection = r.rejection;
  report.tx_id = r.tx_id;
  report.cost = r.cost;
  report.witness_ms = prepared.witness_ms;
  report.prove_ms = prepared.prove_ms;
  return report;
}

CycleReport LearningNode::run_cycle(ledger::LearningContract& ledger) {
  auto p = prepare(ledger);
  if (auto* report = std::get_if<CycleReport>(&p)) return *report;
  return submit(std::get<PreparedTx>(std::move(p)), ledger);
}

}  // namespace zkfl::node
