#include "zkfl/neuralnet.hpp"

#include <charconv>

#include "zkfl/errors.hpp"

namespace zkfl::nn {

using fx::fx_add;
using fx::fx_div_int;
using fx::fx_mul;
using fx::fx_sub;

Model::Model(std::size_t n_inputs, std::size_t n_classes)
    : n_(n_inputs), m_(n_classes), weights_(n_inputs * n_classes), biases_(n_classes) {
  if (n_ == 0 || m_ == 0) throw ConfigError("model dimensions must be positive");
}

Model::Model(std::size_t n_inputs, std::size_t n_classes, std::vector<FxNum> weights, std::vector<FxNum> biases)
    : n_(n_inputs), m_(n_classes), weights_(std::move(weights)), biases_(std::move(biases)) {
  if (n_ == 0 || m_ == 0) throw ConfigError("model dimensions must be positive");
  if (weights_.size() != n_ * m_ || biases_.size() != m_) throw ConfigError("model parameter shape mismatch");
}

FxNum Hyperparams::alpha_eff() const {
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  return fx::fx_div_int_round(alpha, batch_size);
}

std::vector<FxNum> forward(const Model& model, std::span<const FxNum> x, const FxConfig& cfg) {
  if (x.size() != model.inputs()) throw ConfigError("forward: input length does not match model");
  std::vector<FxNum> out(model.classes());
  for (std::size_t j = 0; j < model.classes(); ++j) {
    FxNum acc = model.bias(j);
    for (std::size_t i = 0; i < model.inputs(); ++i) {
      acc = fx_add(acc, fx_mul(x[i], model.weight(i, j), cfg), cfg);
    }
    out[j] = acc;
  }
  return out;
}

std::size_t predict(std::span<const FxNum> scores) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    if (fx::fx_cmp(scores[j], scores[best]) > 0) best = j;
  }
  return best;
}

std::vector<FxNum> one_hot(std::uint32_t label, std::size_t classes, const FxConfig& cfg) {
  if (label >= classes) throw RangeError("label " + std::to_string(label) + " outside [0, m)");
  std::vector<FxNum> y(classes);
  y[label] = FxNum::from_parts(cfg.scale(), false);
  return y;
}

FxNum loss(std::span<const FxNum> yhat, std::span<const FxNum> y, const FxConfig& cfg) {
  if (yhat.size() != y.size() || y.empty()) throw ConfigError("loss: length mismatch");
  FxNum acc;
  for (std::size_t j = 0; j < y.size(); ++j) {
    const FxNum d = fx_sub(yhat[j], y[j], cfg);
    acc = fx_add(acc, fx_mul(d, d, cfg), cfg);
  }
  return fx_div_int(acc, y.size());
}

void validate_batch(const Batch& batch, const Hyperparams& hp) {
  if (batch.n != hp.n_inputs) throw ConfigError("batch feature count does not match hyperparameters");
  if (batch.size() != hp.batch_size) throw ConfigError("batch size does not match hyperparameters");
  if (batch.inputs.size() != batch.size() * batch.n) throw ConfigError("batch input matrix has wrong size");
  for (auto label : batch.labels) {
    if (label >= hp.n_classes) throw RangeError("batch label outside [0, m)");
  }
}

Model train_step(const Model& model, const Batch& batch, const Hyperparams& hp, const FxConfig& cfg) {
  validate_batch(batch, hp);
  if (model.inputs() != hp.n_inputs || model.classes() != hp.n_classes) {
    throw ConfigError("train_step: model shape does not match hyperparameters");
  }
  const std::size_t n = hp.n_inputs;
  const std::size_t m = hp.n_classes;
  const std::size_t batch_size = hp.batch_size;
  const FxNum alpha_eff = hp.alpha_eff();

  std::vector<FxNum> delta(batch_size * m);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const auto yhat = forward(model, batch.row(k), cfg);
    for (std::size_t j = 0; j < m; ++j) {
      const FxNum target = batch.labels[k] == j ? FxNum::from_parts(cfg.scale(), false) : FxNum{};
      delta[k * m + j] = fx_div_int(fx_sub(yhat[j], target, cfg), m);
    }
  }

  Model next = model;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      FxNum grad;
      for (std::size_t k = 0; k < batch_size; ++k) {
        grad = fx_add(grad, fx_mul(delta[k * m + j], batch.inputs[k * n + i], cfg), cfg);
      }
      next.set_weight(i, j, fx_sub(model.weight(i, j), fx_mul(alpha_eff, grad, cfg), cfg));
    }
    FxNum grad;
    for (std::size_t k = 0; k < batch_size; ++k) grad = fx_add(grad, delta[k * m + j], cfg);
    next.set_bias(j, fx_sub(model.bias(j), fx_mul(alpha_eff, grad, cfg), cfg));
  }
  return next;
}

double accuracy(const Model& model, const LabeledSet& data, const FxConfig& cfg) {
  if (data.size() == 0) throw EmptyDataError("accuracy: empty evaluation set");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    const auto scores = forward(model, data.row(k), cfg);
    if (predict(scores) == data.labels[k]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.size());
}

nlohmann::json fx_to_json(FxNum a) {
  return nlohmann::json::array({std::to_string(a.magnitude()), a.negative() ? 1 : 0});
}

FxNum fx_from_json(const nlohmann::json& j, const FxConfig& cfg) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_string() || !j[1].is_number_integer()) {
    throw Error("fixed-point value must be [\"<magnitude>\", <sign bit>]");
  }
  const auto& text = j[0].get_ref<const std::string&>();
  std::uint64_t mag = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), mag);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw Error("invalid magnitude string '" + text + "'");
  }
  if (mag >= cfg.magnitude_limit()) throw OverflowError("magnitude exceeds configured bound");
  const auto sign = j[1].get<int>();
  if (sign != 0 && sign != 1) throw Error("sign bit must be 0 or 1");
  if (mag == 0 && sign == 1) throw Error("negative zero is not canonical");
  return FxNum::from_parts(mag, sign == 1);
}

nlohmann::json model_to_json(const Model& model, const FxConfig& cfg) {
  nlohmann::json weights = nlohmann::json::array();
  for (std::size_t i = 0; i < model.inputs(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t j = 0; j < model.classes(); ++j) row.push_back(fx_to_json(model.weight(i, j)));
    weights.push_back(std::move(row));
  }
  nlohmann::json biases = nlohmann::json::array();
  for (auto b : model.biases()) biases.push_back(fx_to_json(b));
  return {{"n", model.inputs()},
          {"m", model.classes()},
          {"scale_bits", cfg.scale_bits},
          {"weights", std::move(weights)},
          {"biases", std::move(biases)}};
}

Model model_from_json(const nlohmann::json& j, const FxConfig& cfg) {
  const auto n = j.at("n").get<std::size_t>();
  const auto m = j.at("m").get<std::size_t>();
  if (j.at("scale_bits").get<unsigned>() != cfg.scale_bits) throw ConfigError("model scale_bits mismatch");
  const auto& weights = j.at("weights");
  const auto& biases = j.at("biases");
  if (!weights.is_array() || weights.size() != n || !biases.is_array() || biases.size() != m) {
    throw ConfigError("model JSON shape mismatch");
  }
  Model model(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (!weights[i].is_array() || weights[i].size() != m) throw ConfigError("model JSON shape mismatch");
    for (std::size_t jj = 0; jj < m; ++jj) model.set_weight(i, jj, fx_from_json(weights[i][jj], cfg));
  }
  for (std::size_t jj = 0; jj < m; ++jj) model.set_bias(jj, fx_from_json(biases[jj], cfg));
  return model;
}

Sha256 model_digest(const Model& model, const FxConfig& cfg) { return sha256(model_to_json(model, cfg).dump()); }

std::string model_digest_hex(const Model& model, const FxConfig& cfg) { return to_hex(model_digest(model, cfg)); }

}  // namespace zkfl::nn
