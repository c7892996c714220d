#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "zkfl/neuralnet.hpp"
#include "zkfl/rng.hpp"

namespace zkfl::data {

inline constexpr std::size_t kSegmentRows = 125;
inline constexpr std::size_t kSegmentCols = 45;
inline constexpr std::size_t kUnitChannels = 9;
inline constexpr std::size_t kUnits = 5;
inline constexpr std::size_t kSubjects = 8;
inline constexpr int kActivities = 19;

/// One 5-second recording: 125 rows of 45 sensor channels (5 units x 9).
struct RawSegment {
  int activity_id = 0;
  int subject_id = 0;
  std::vector<double> samples;  // row-major, 125 * 45

  double at(std::size_t row, std::size_t col) const { return samples[row * kSegmentCols + col]; }
};

/// Parses one segment file. Throws FormatError with 1-based line and column.
RawSegment parse_segment(std::string_view text, int activity_id = 0, int subject_id = 0);

/// Rows restricted to the 9 channels of one sensor unit (0 = torso).
std::vector<std::array<double, kUnitChannels>> reduce_features(const RawSegment& seg, std::size_t unit = 0);

/// Activity id (1..19) to merged class index.
class MergeTable {
 public:
  static MergeTable default_table();
  /// {"classes": [{"name", "activities": [...]}, ...]}. Throws ConfigError
  /// unless every activity maps to exactly one class.
  static MergeTable from_json(const nlohmann::json& j);
  static MergeTable load(const std::filesystem::path& path);

  /// Throws RangeError outside 1..19.
  std::uint32_t operator()(int activity_id) const;
  std::size_t classes() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  nlohmann::json to_json() const;

 private:
  std::array<std::uint32_t, kActivities> map_{};
  std::vector<std::string> names_;
};

struct Datapoint {
  std::vector<double> features;
  std::uint32_t label = 0;

  friend bool operator==(const Datapoint&, const Datapoint&) = default;
};

using Shard = std::vector<Datapoint>;

/// Every row of every segment becomes a datapoint of its subject's shard.
/// Always returns kSubjects shards; shard i holds subject i+1.
std::vector<Shard> shard_by_subject(std::span<const RawSegment> segments, const MergeTable& table,
                                    std::size_t unit = 0);

/// Reads a{01..19}/p{1..8}/s*.txt under root. Throws ConfigError if root is
/// missing or holds no segments.
std::vector<RawSegment> load_uci(const std::filesystem::path& root);

std::vector<std::size_t> class_histogram(const Shard& shard, std::size_t classes);

struct Split {
  Shard train;
  Shard heldout;
};

/// Holds out round(fraction * count) points of every class.
Split stratified_split(const Shard& shard, double fraction, std::uint64_t seed);

/// Per-feature z-score with statistics from training data only.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;

  static Standardizer fit(std::span<const Shard> shards);
  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> invert(std::span<const double> z) const;
  Shard apply(const Shard& shard) const;

  nlohmann::json to_json() const;
  static Standardizer from_json(const nlohmann::json& j);
};

nn::LabeledSet encode_set(const Shard& shard, const fx::FxConfig& cfg);

/// Endless batches drawn without replacement within each epoch; every epoch
/// is a fresh permutation and a batch may span two epochs.
class BatchStream {
 public:
  BatchStream(Shard shard, std::size_t batch_size, std::uint64_t seed, fx::FxConfig cfg);

  nn::Batch next();
  std::size_t epoch() const { return epoch_; }
  /// Indices into the shard consumed by the last next().
  const std::vector<std::size_t>& last_indices() const { return last_; }

 private:
  void reshuffle();

  Shard shard_;
  std::size_t batch_size_;
  fx::FxConfig cfg_;
  Rng rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> last_;
};

struct SynthOptions {
  std::size_t dims = 9;
  std::size_t classes = 6;
  /// Tilts each node's class prior towards a different class; 0 keeps all
  /// nodes identically distributed.
  double skew = 0.0;
  double separation = 3.0;
  double noise = 1.0;
};

/// Gaussian class clusters with shared centres; one shard per node.
std::vector<Shard> synthesize(std::size_t n_nodes, std::size_t per_node, std::uint64_t seed,
                              const SynthOptions& opts = {});

/// Versioned binary shard file: "ZKFLSHRD", version, digest, body.
std::vector<std::uint8_t> serialize_shard(const Shard& shard);
Shard deserialize_shard(std::span<const std::uint8_t> bytes);

}  // namespace zkfl::data
