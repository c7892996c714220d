#include "zkfl/ledger.hpp"

#include "zkfl/errors.hpp"

namespace zkfl::ledger {

namespace {

// temp + trunc((local - temp) / k), evaluated in 128 bits; the result lies
// between temp and local, so it always fits the magnitude bound again.
fx::FxNum running_mean_step(fx::FxNum temp, fx::FxNum local, std::uint64_t k) {
  auto as_int = [](fx::FxNum v) {
    const auto m = static_cast<__int128>(v.magnitude());
    return v.negative() ? -m : m;
  };
  const __int128 t = as_int(temp);
  const __int128 next = t + (as_int(local) - t) / static_cast<__int128>(k);
  const bool negative = next < 0;
  return fx::FxNum::from_parts(static_cast<std::uint64_t>(negative ? -next : next), negative);
}

}  // namespace

std::string_view to_string(RejectReason r) {
  switch (r) {
    case RejectReason::kUnregistered:
      return "Unregistered";
    case RejectReason::kDuplicateInCycle:
      return "DuplicateInCycle";
    case RejectReason::kMalformed:
      return "Malformed";
    case RejectReason::kStaleModel:
      return "StaleModel";
    case RejectReason::kInvalidProof:
      return "InvalidProof";
  }
  return "Unknown";
}

Address account_address(std::size_t index) {
  const auto digest = to_hex(sha256("zkfl-account-" + std::to_string(index)));
  return "0x" + digest.substr(0, 40);
}

LearningContract::LearningContract(DeployConfig config, std::set<Address> registered, nn::Model initial)
    : hp_(config.hp),
      fx_(config.fx),
      vk_(std::move(config.verification_key)),
      backend_(&circuit::backend_by_id(vk_.backend)),
      cost_model_(config.cost) {
  state_.registered = std::move(registered);
  state_.committed_model = initial;
  state_.temp_model = std::move(initial);
  state_.cycle_length_blocks = config.cycle_length_blocks;
  committed_digest_ = nn::model_digest_hex(state_.committed_model, fx_);
}

LearningContract LearningContract::deploy(DeployConfig config) {
  std::set<Address> registered(config.accounts.begin(), config.accounts.end());
  if (registered.empty()) throw ConfigError("deploy requires at least one registered account");
  if (registered.size() != config.accounts.size()) throw ConfigError("duplicate account in deploy config");
  if (config.cycle_length_blocks == 0) throw ConfigError("cycle length must be at least one block");
  const auto& vk = config.verification_key;
  if (!vk.system || vk.system->digest() != vk.cs_digest) throw ConfigError("verification key is not bound to a system");
  const auto& shape = vk.system->shape();
  if (shape.batch_size != config.hp.batch_size || shape.n_inputs != config.hp.n_inputs ||
      shape.n_classes != config.hp.n_classes || !(shape.fx == config.fx)) {
    throw ConfigError("verification key was generated for a different circuit shape");
  }
  nn::Model initial = config.initial_model.value_or(nn::Model(config.hp.n_inputs, config.hp.n_classes));
  if (initial.inputs() != config.hp.n_inputs || initial.classes() != config.hp.n_classes) {
    throw ConfigError("initial model shape does not match hyperparameters");
  }
  circuit::backend_by_id(vk.backend);
  return LearningContract(std::move(config), std::move(registered), std::move(initial));
}

std::uint64_t LearningContract::cost_for(const UpdateTx& tx, std::size_t constraints_checked) const {
  const auto bytes = tx_json_size(tx, fx_, vk_.system->field());
  return cost_model_.base + cost_model_.per_byte * bytes + cost_model_.per_constraint * constraints_checked;
}

std::uint64_t LearningContract::estimate_cost(const UpdateTx& tx) const {
  return cost_for(tx, vk_.system->num_constraints());
}

void LearningContract::fold_into_temp(const nn::Model& local) {
  const std::uint64_t k = state_.update_count_this_cycle + 1;
  auto& temp = state_.temp_model;
  for (std::size_t e = 0; e < temp.weights().size(); ++e) {
    temp.weights()[e] = running_mean_step(temp.weights()[e], local.weights()[e], k);
  }
  for (std::size_t j = 0; j < temp.biases().size(); ++j) {
    temp.biases()[j] = running_mean_step(temp.biases()[j], local.biases()[j], k);
  }
}

SubmitResult LearningContract::submit_update(const UpdateTx& tx) {
  SubmitResult result;
  result.tx_id = next_tx_id_++;
  std::size_t checked = 0;
  try {
    if (!state_.registered.contains(tx.sender)) {
      result.rejection = RejectReason::kUnregistered;
    } else if (state_.updates_this_cycle.contains(tx.sender)) {
      result.rejection = RejectReason::kDuplicateInCycle;
    } else if (tx.local_model.inputs() != hp_.n_inputs || tx.local_model.classes() != hp_.n_classes) {
      result.rejection = RejectReason::kMalformed;
    } else if (tx.old_model_digest != committed_digest_) {
      result.rejection = RejectReason::kStaleModel;
    } else {
      if (verify_proofs_) {
        checked = vk_.system->num_constraints();
        const auto pub = circuit::encode_public_inputs(vk_.system->shape(), state_.committed_model, hp_.alpha_eff(),
                                                       tx.local_model);
        if (!backend_->verify(vk_, pub, tx.proof)) result.rejection = RejectReason::kInvalidProof;
      }
      if (result.accepted()) {
        fold_into_temp(tx.local_model);
        state_.updates_this_cycle[tx.sender] = true;
        ++state_.update_count_this_cycle;
      }
    }
  } catch (const std::exception&) {
    result.rejection = RejectReason::kMalformed;
  }
  try {
    result.cost = cost_for(tx, checked);
  } catch (const std::exception&) {
    result.cost = cost_model_.base;
  }
  log(result.tx_id, tx, result);
  return result;
}

void LearningContract::log(std::uint64_t tx_id, const UpdateTx& tx, const SubmitResult& r) {
  state_.cost_log.push_back({tx_id, r.cost});
  nlohmann::json e = {{"event", r.accepted() ? "accept" : "reject"},
                      {"tx", tx_id},
                      {"block", state_.block_height},
                      {"cycle", state_.cycle_index},
                      {"sender", tx.sender},
                      {"cost", r.cost}};
  if (r.rejection) e["reason"] = to_string(*r.rejection);
  events_.push_back(std::move(e));
}

void LearningContract::advance_block(std::uint64_t k) {
  state_.block_height += k;
  while (state_.block_height - state_.cycle_start_block >= state_.cycle_length_blocks) finalize_cycle();
}

std::uint64_t LearningContract::blocks_until_boundary() const {
  const auto elapsed = state_.block_height - state_.cycle_start_block;
  return elapsed >= state_.cycle_length_blocks ? 0 : state_.cycle_length_blocks - elapsed;
}

void LearningContract::finalize_cycle() {
  if (state_.block_height - state_.cycle_start_block < state_.cycle_length_blocks) {
    throw Error("finalize_cycle: cycle boundary not reached");
  }
  const auto updates = state_.update_count_this_cycle;
  if (updates > 0) {
    state_.committed_model = state_.temp_model;
    committed_digest_ = nn::model_digest_hex(state_.committed_model, fx_);
  }
  state_.temp_model = state_.committed_model;
  state_.updates_this_cycle.clear();
  state_.update_count_this_cycle = 0;
  events_.push_back({{"event", "finalize"},
                     {"block", state_.block_height},
                     {"cycle", state_.cycle_index},
                     {"updates", updates},
                     {"committed_digest", committed_digest_}});
  ++state_.cycle_index;
  state_.cycle_start_block += state_.cycle_length_blocks;
}

std::pair<nn::Model, std::uint64_t> LearningContract::read_global() const {
  return {state_.committed_model, state_.cycle_index};
}

nlohmann::json LearningContract::snapshot() const {
  nlohmann::json updates = nlohmann::json::object();
  for (const auto& [addr, flag] : state_.updates_this_cycle) updates[addr] = flag;
  nlohmann::json costs = nlohmann::json::array();
  for (const auto& c : state_.cost_log) costs.push_back({c.tx_id, c.cost});
  return {{"block_height", state_.block_height},
          {"registered", state_.registered},
          {"committed_model", nn::model_to_json(state_.committed_model, fx_)},
          {"temp_model", nn::model_to_json(state_.temp_model, fx_)},
          {"updates_this_cycle", std::move(updates)},
          {"cycle_index", state_.cycle_index},
          {"cycle_start_block", state_.cycle_start_block},
          {"cycle_length_blocks", state_.cycle_length_blocks},
          {"update_count_this_cycle", state_.update_count_this_cycle},
          {"verification_key_digest", to_hex(vk_.cs_digest)},
          {"backend", vk_.backend},
          {"alpha_eff", nn::fx_to_json(hp_.alpha_eff())},
          {"cost_log", std::move(costs)}};
}

std::string LearningContract::state_digest() const { return to_hex(sha256(snapshot().dump())); }

nlohmann::json tx_to_json(const UpdateTx& tx, const fx::FxConfig& cfg, const circuit::PrimeField& field) {
  return {{"sender", tx.sender},
          {"model", nn::model_to_json(tx.local_model, cfg)},
          {"proof", circuit::proof_to_json(tx.proof, field)},
          {"old_digest", tx.old_model_digest}};
}

UpdateTx tx_from_json(const nlohmann::json& j, const fx::FxConfig& cfg, const circuit::PrimeField& field) {
  UpdateTx tx{j.at("sender").get<std::string>(), nn::model_from_json(j.at("model"), cfg),
              circuit::proof_from_json(j.at("proof"), field), j.at("old_digest").get<std::string>()};
  return tx;
}

std::size_t tx_json_size(const UpdateTx& tx, const fx::FxConfig& cfg, const circuit::PrimeField& field) {
  UpdateTx shell{tx.sender, tx.local_model, {}, tx.old_model_digest};
  shell.proof.backend = tx.proof.backend;
  shell.proof.cs_digest = tx.proof.cs_digest;
  shell.proof.public_inputs = tx.proof.public_inputs;
  return tx_to_json(shell, cfg, field).dump().size() + base64_length(tx.proof.payload.size());
}

}  // namespace zkfl::ledger
