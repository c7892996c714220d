#pragma once

// Real-arithmetic twin of the fixed-point trainer. Instantiated with double for
// finite-difference checks and with an exact rational type (e.g. mpq_class)
// to bound fixed-point truncation error.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "zkfl/neuralnet.hpp"

namespace zkfl::nn {

template <class Real>
struct RealModel {
  std::size_t n = 0;
  std::size_t m = 0;
  std::vector<Real> weights;  // row-major, i*m + j
  std::vector<Real> biases;

  Real& weight(std::size_t i, std::size_t j) { return weights[i * m + j]; }
  const Real& weight(std::size_t i, std::size_t j) const { return weights[i * m + j]; }
};

template <class Real>
struct RealBatch {
  std::size_t n = 0;
  std::vector<Real> inputs;  // row-major
  std::vector<std::uint32_t> labels;

  std::size_t size() const { return labels.size(); }
};

/// Exact value of a fixed-point number in Real (magnitude / 2^scale_bits).
template <class Real>
Real to_real(FxNum a, const FxConfig& cfg) {
  Real r = Real(static_cast<unsigned long>(a.magnitude()));
  r /= Real(static_cast<unsigned long>(cfg.scale()));
  return a.negative() ? Real(-r) : r;
}

template <class Real>
RealModel<Real> to_real(const Model& model, const FxConfig& cfg) {
  RealModel<Real> out{model.inputs(), model.classes(), {}, {}};
  out.weights.reserve(model.weights().size());
  for (auto w : model.weights()) out.weights.push_back(to_real<Real>(w, cfg));
  for (auto b : model.biases()) out.biases.push_back(to_real<Real>(b, cfg));
  return out;
}

template <class Real>
RealBatch<Real> to_real(const Batch& batch, const FxConfig& cfg) {
  RealBatch<Real> out{batch.n, {}, batch.labels};
  out.inputs.reserve(batch.inputs.size());
  for (auto x : batch.inputs) out.inputs.push_back(to_real<Real>(x, cfg));
  return out;
}

template <class Real>
std::vector<Real> reference_forward(const RealModel<Real>& model, std::span<const Real> x) {
  std::vector<Real> out(model.m);
  for (std::size_t j = 0; j < model.m; ++j) {
    Real acc = model.biases[j];
    for (std::size_t i = 0; i < model.n; ++i) acc += x[i] * model.weight(i, j);
    out[j] = acc;
  }
  return out;
}

/// Same update formula as train_step, evaluated without any rounding.
template <class Real>
RealModel<Real> reference_train_step(const RealModel<Real>& model, const RealBatch<Real>& batch,
                                     const Real& alpha_eff) {
  const std::size_t n = model.n;
  const std::size_t m = model.m;
  const std::size_t batch_size = batch.size();
  const Real classes = Real(static_cast<unsigned long>(m));

  std::vector<Real> delta(batch_size * m);
  for (std::size_t k = 0; k < batch_size; ++k) {
    const auto yhat = reference_forward(model, std::span<const Real>(batch.inputs).subspan(k * n, n));
    for (std::size_t j = 0; j < m; ++j) {
      Real d = yhat[j];
      if (batch.labels[k] == j) d -= Real(1);
      delta[k * m + j] = d / classes;
    }
  }

  RealModel<Real> next = model;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      Real grad = Real(0);
      for (std::size_t k = 0; k < batch_size; ++k) grad += delta[k * m + j] * batch.inputs[k * n + i];
      next.weight(i, j) = model.weight(i, j) - alpha_eff * grad;
    }
    Real grad = Real(0);
    for (std::size_t k = 0; k < batch_size; ++k) grad += delta[k * m + j];
    next.biases[j] = model.biases[j] - alpha_eff * grad;
  }
  return next;
}

/// Objective whose gradient the update descends: sum over samples of half the
/// per-sample mean squared error. Dividing the step by B (alpha_eff = alpha/B)
/// turns this into a step on the batch-mean loss.
template <class Real>
Real reference_objective(const RealModel<Real>& model, const RealBatch<Real>& batch) {
  Real total = Real(0);
  const std::size_t n = model.n;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto yhat = reference_forward(model, std::span<const Real>(batch.inputs).subspan(k * n, n));
    Real sq = Real(0);
    for (std::size_t j = 0; j < model.m; ++j) {
      Real d = yhat[j];
      if (batch.labels[k] == j) d -= Real(1);
      sq += d * d;
    }
    total += sq / Real(static_cast<unsigned long>(2 * model.m));
  }
  return total;
}

}  // namespace zkfl::nn
