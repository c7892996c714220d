#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "zkfl/digest.hpp"
#include "zkfl/fixedpoint.hpp"

namespace zkfl::nn {

using fx::FxConfig;
using fx::FxNum;

/// Single-layer linear classifier: n inputs, m class scores. Weights are
/// stored row-major, w(i, j) at i*m + j.
class Model {
 public:
  Model(std::size_t n_inputs, std::size_t n_classes);
  Model(std::size_t n_inputs, std::size_t n_classes, std::vector<FxNum> weights, std::vector<FxNum> biases);

  std::size_t inputs() const { return n_; }
  std::size_t classes() const { return m_; }

  FxNum weight(std::size_t i, std::size_t j) const { return weights_[i * m_ + j]; }
  FxNum bias(std::size_t j) const { return biases_[j]; }
  void set_weight(std::size_t i, std::size_t j, FxNum v) { weights_[i * m_ + j] = v; }
  void set_bias(std::size_t j, FxNum v) { biases_[j] = v; }

  std::span<const FxNum> weights() const { return weights_; }
  std::span<const FxNum> biases() const { return biases_; }
  std::span<FxNum> weights() { return weights_; }
  std::span<FxNum> biases() { return biases_; }

  friend bool operator==(const Model&, const Model&) = default;

 private:
  std::size_t n_;
  std::size_t m_;
  std::vector<FxNum> weights_;
  std::vector<FxNum> biases_;
};

/// Fixed-size training input: rows of n encoded features with class labels.
struct Batch {
  std::size_t n = 0;
  std::vector<FxNum> inputs;  // size() * n, row-major
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const FxNum> row(std::size_t k) const { return std::span(inputs).subspan(k * n, n); }

  friend bool operator==(const Batch&, const Batch&) = default;
};

struct Hyperparams {
  FxNum alpha;
  std::size_t batch_size = 10;
  std::size_t n_inputs = 9;
  std::size_t n_classes = 6;

  /// alpha / batch_size as one fixed-point constant (rounded to nearest).
  FxNum alpha_eff() const;

  friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Labeled evaluation data, features already encoded.
struct LabeledSet {
  std::size_t n = 0;
  std::vector<FxNum> features;
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const FxNum> row(std::size_t k) const { return std::span(features).subspan(k * n, n); }
};

/// y_j = b_j + sum_i x_i w_ij, accumulated with i ascending.
std::vector<FxNum> forward(const Model& model, std::span<const FxNum> x, const FxConfig& cfg);

/// Index of the largest score; ties resolve to the lowest index.
std::size_t predict(std::span<const FxNum> scores);

/// One-hot encoding of a label at fixed-point scale (1.0 -> S).
std::vector<FxNum> one_hot(std::uint32_t label, std::size_t classes, const FxConfig& cfg);

/// Mean squared error over the m outputs.
FxNum loss(std::span<const FxNum> yhat, std::span<const FxNum> y, const FxConfig& cfg);

/// One gradient step over the whole batch:
///   delta_kj = (yhat_kj - y_kj) / m
///   w_ij' = w_ij - alpha_eff * sum_k delta_kj * x_ki
///   b_j'  = b_j  - alpha_eff * sum_k delta_kj
/// Every product is rescaled with truncation toward zero, sums run k then i
/// ascending. The training circuit proves exactly this computation.
Model train_step(const Model& model, const Batch& batch, const Hyperparams& hp, const FxConfig& cfg);

/// Fraction of samples whose predicted class equals the label.
double accuracy(const Model& model, const LabeledSet& data, const FxConfig& cfg);

void validate_batch(const Batch& batch, const Hyperparams& hp);

nlohmann::json fx_to_json(FxNum a);
FxNum fx_from_json(const nlohmann::json& j, const FxConfig& cfg);

/// {n, m, scale_bits, weights[][], biases[]} with entries as [magnitude, sign].
nlohmann::json model_to_json(const Model& model, const FxConfig& cfg);
Model model_from_json(const nlohmann::json& j, const FxConfig& cfg);

/// SHA-256 of the canonical (compact, key-sorted) model JSON.
Sha256 model_digest(const Model& model, const FxConfig& cfg);
std::string model_digest_hex(const Model& model, const FxConfig& cfg);

}  // namespace zkfl::nn
