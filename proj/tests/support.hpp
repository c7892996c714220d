#pragma once

// Random instance generators shared by the unit and acceptance tests.

#include <cstdint>

#include "zkfl/neuralnet.hpp"
#include "zkfl/rng.hpp"

namespace zkfl::testing {

inline fx::FxNum random_fx(Rng& rng, double bound, const fx::FxConfig& cfg) {
  return fx::encode(rng.uniform(-bound, bound), cfg);
}

inline nn::Model random_model(Rng& rng, std::size_t n, std::size_t m, double bound, const fx::FxConfig& cfg) {
  nn::Model model(n, m);
  for (auto& w : model.weights()) w = random_fx(rng, bound, cfg);
  for (auto& b : model.biases()) b = random_fx(rng, bound, cfg);
  return model;
}

inline nn::Batch random_batch(Rng& rng, std::size_t batch, std::size_t n, std::size_t m, double bound,
                              const fx::FxConfig& cfg) {
  nn::Batch b;
  b.n = n;
  for (std::size_t k = 0; k < batch * n; ++k) b.inputs.push_back(random_fx(rng, bound, cfg));
  for (std::size_t k = 0; k < batch; ++k) b.labels.push_back(static_cast<std::uint32_t>(rng.below(m)));
  return b;
}

inline nn::Hyperparams make_hp(double alpha, std::size_t batch, std::size_t n, std::size_t m,
                               const fx::FxConfig& cfg) {
  nn::Hyperparams hp;
  hp.alpha = fx::encode(alpha, cfg);
  hp.batch_size = batch;
  hp.n_inputs = n;
  hp.n_classes = m;
  return hp;
}

}  // namespace zkfl::testing
