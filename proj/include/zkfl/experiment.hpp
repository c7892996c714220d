#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "zkfl/dataset.hpp"
#include "zkfl/ledger.hpp"
#include "zkfl/node.hpp"

namespace zkfl::experiment {

namespace fs = std::filesystem;

struct ByzantineSpec {
  std::size_t count = 0;
  node::ByzantineMode mode = node::ByzantineMode::kCorruptModel;

  friend bool operator==(const ByzantineSpec&, const ByzantineSpec&) = default;
};

/// "<n>:<mode>", e.g. "2:replay_proof". Throws ConfigError.
ByzantineSpec parse_byzantine(std::string_view text);

inline constexpr double kDefaultAlpha = 0.05;

struct ExperimentConfig {
  std::size_t n_nodes = 8;
  std::size_t batch_size = 40;
  std::size_t cycles = 300;
  std::uint64_t seed = 1;
  fx::FxConfig fx;
  double alpha = kDefaultAlpha;
  std::uint64_t cycle_length_blocks = 100;
  /// "synthetic" or a directory in the UCI layout.
  std::string dataset = "synthetic";
  std::size_t unit = 0;
  /// Empty selects the built-in table.
  std::string merge_table;
  std::size_t synthetic_per_node = 500;
  double synthetic_skew = 0.0;
  double synthetic_separation = 3.0;
  double synthetic_noise = 1.0;
  double heldout_fraction = 0.2;
  /// Extra registered accounts that misbehave; honest nodes are unaffected.
  std::vector<ByzantineSpec> byzantine;
  /// Probability that an honest node's transaction arrives after the boundary.
  double drop_late = 0.0;
  std::string backend = "transparent-replay";
  std::size_t checkpoint_every = 50;
  ledger::CostModel cost;
  fs::path out = "runs/default";

  /// Throws ConfigError.
  void validate() const;
  nn::Hyperparams hyperparams() const;
  circuit::CircuitShape shape() const;

  nlohmann::json to_json() const;
  /// Missing keys keep their defaults; unknown keys are an error.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const fs::path& path);
};

/// Standardized node shards plus the held-out evaluation set.
struct PreparedData {
  std::vector<data::Shard> train;
  data::Shard heldout;
  data::Standardizer standardizer;
  std::size_t classes = 6;
};

PreparedData prepare_data(const ExperimentConfig& cfg);

struct SetupSummary {
  std::size_t constraints = 0;
  std::size_t variables = 0;
  std::size_t public_inputs = 0;
  std::string cs_digest;
};

/// Writes config.json, cs.bin, keys.bin, layout.json, ledger_init.json and
/// stats.json into cfg.out.
SetupSummary cmd_setup(const ExperimentConfig& cfg);

struct CycleMetrics {
  std::size_t cycle = 0;
  double accuracy = 0.0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::uint64_t cumulative_cost = 0;
  double mean_witness_ms = 0.0;
  double mean_prove_ms = 0.0;
};

struct RunSummary {
  std::vector<CycleMetrics> metrics;
  std::vector<std::string> committed_digests;  // after every cycle
  nn::Model final_model{1, 1};
  std::optional<std::size_t> cycles_to_target;  // first cycle (1-based) with accuracy >= 0.6
};

inline constexpr double kTargetAccuracy = 0.6;

/// Simulates cfg.cycles cycles against the setup artifacts in cfg.out and
/// writes metrics.csv, timings.csv, ledger_events.jsonl, node_<i>.jsonl,
/// checkpoints/ and run.json. Throws ArtifactMismatch if the artifacts do not
/// match the configuration.
RunSummary cmd_run(const ExperimentConfig& cfg);

/// Aggregates every run directory under dir (or dir itself) into
/// accuracy_by_cycle.csv and summary.csv, and prints a summary table.
/// Throws MissingMetrics if no run is found.
void cmd_report(const fs::path& dir, std::ostream& out);

std::string format_metrics_row(const CycleMetrics& m);

}  // namespace zkfl::experiment
