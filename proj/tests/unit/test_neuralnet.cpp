#include <doctest.h>

#include <gmpxx.h>

#include <algorithm>
#include <cmath>

#include "../support.hpp"
#include "zkfl/errors.hpp"
#include "zkfl/neuralnet.hpp"
#include "zkfl/reference.hpp"

using namespace zkfl;
using namespace zkfl::nn;
using fx::encode;

namespace {
const FxConfig cfg{};
const double S = static_cast<double>(cfg.scale());
FxNum v(double x) { return encode(x, cfg); }

std::vector<FxNum> vec(std::initializer_list<double> xs) {
  std::vector<FxNum> out;
  for (double x : xs) out.push_back(v(x));
  return out;
}

double to_double(const mpq_class& q) { return q.get_d(); }
}  // namespace

TEST_CASE("forward examples") {
  SUBCASE("zero weights pass the biases") {
    Model model(3, 4, std::vector<FxNum>(12), vec({1, 2, 3, 4}));
    CHECK(forward(model, vec({0.3, -2, 7}), cfg) == vec({1, 2, 3, 4}));
  }
  SUBCASE("unit vector selects a row") {
    Rng rng(1);
    auto model = testing::random_model(rng, 3, 2, 4.0, cfg);
    for (auto& b : model.biases()) b = FxNum{};
    for (std::size_t k = 0; k < 3; ++k) {
      std::vector<FxNum> x(3);
      x[k] = v(1);
      CHECK(forward(model, x, cfg) == std::vector<FxNum>{model.weight(k, 0), model.weight(k, 1)});
    }
  }
  SUBCASE("hand multiply") {
    Model model(2, 2, vec({1, 0, 0, 1}), vec({0.5, -0.5}));
    CHECK(forward(model, vec({1, 2}), cfg) == vec({1.5, 1.5}));
    const std::vector<double> x{1, 2};
    const auto ref = reference_forward(to_real<double>(model, cfg), std::span<const double>(x));
    CHECK(ref == std::vector<double>{1.5, 1.5});
  }
  CHECK_THROWS_AS(forward(Model(2, 2), vec({1}), cfg), ConfigError);
}

TEST_CASE("predict examples") {
  CHECK(predict(vec({0.1, 0.9, 0.3})) == 1);
  CHECK(predict(vec({0.5, 0.5})) == 0);
  CHECK(predict(vec({-2, -2, -2, -2})) == 0);
  CHECK(predict(vec({-3, -1, -2})) == 1);
}

TEST_CASE("predict is shift invariant") {
  Rng rng(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<FxNum> y;
    for (int j = 0; j < 6; ++j) y.push_back(testing::random_fx(rng, 5, cfg));
    const auto shift = testing::random_fx(rng, 5, cfg);
    auto shifted = y;
    for (auto& s : shifted) s = fx::fx_add(s, shift, cfg);
    CHECK(predict(y) == predict(shifted));
  }
}

TEST_CASE("one_hot") {
  CHECK(one_hot(2, 4, cfg) == vec({0, 0, 1, 0}));
  CHECK_THROWS_AS(one_hot(4, 4, cfg), RangeError);
}

TEST_CASE("loss examples") {
  CHECK(loss(vec({0.2, 0.8}), vec({0.2, 0.8}), cfg) == FxNum{});
  CHECK(loss(vec({0, 0}), vec({1, 0}), cfg) == v(0.5));
  const double l = fx::decode(loss(vec({0.5, 0, 0}), vec({1, 0, 0}), cfg), cfg);
  CHECK(std::fabs(l - 0.25 / 3) <= 1.0 / S);
}

TEST_CASE("alpha_eff rounds alpha / B to nearest") {
  auto hp = testing::make_hp(0.05, 40, 9, 6, cfg);
  // 0.05 -> 3277 units; 3277/40 = 81.925 -> 82
  CHECK(hp.alpha.magnitude() == 3277);
  CHECK(hp.alpha_eff().magnitude() == 82);
  hp.batch_size = 1;
  CHECK(hp.alpha_eff() == hp.alpha);
}

TEST_CASE("train_step single cell by hand") {
  auto hp = testing::make_hp(1.0, 1, 1, 1, cfg);
  Model model(1, 1);
  Batch batch{1, vec({1}), {0}};
  const auto next = train_step(model, batch, hp, cfg);
  CHECK(next.weight(0, 0) == v(1));
  CHECK(next.bias(0) == v(1));
}

TEST_CASE("train_step is the identity at zero gradient") {
  // yhat equals the one-hot label for every sample.
  auto hp = testing::make_hp(0.5, 2, 2, 2, cfg);
  Model model(2, 2, vec({1, 0, 0, 1}), vec({0, 0}));
  Batch batch{2, vec({1, 0, 0, 1}), {0, 1}};
  CHECK(train_step(model, batch, hp, cfg) == model);
}

TEST_CASE("train_step rejects shape mismatches") {
  auto hp = testing::make_hp(0.5, 2, 2, 2, cfg);
  CHECK_THROWS_AS(train_step(Model(3, 2), Batch{2, vec({1, 0, 0, 1}), {0, 1}}, hp, cfg), ConfigError);
  CHECK_THROWS_AS(train_step(Model(2, 2), Batch{2, vec({1, 0}), {0}}, hp, cfg), ConfigError);
  CHECK_THROWS_AS(train_step(Model(2, 2), Batch{2, vec({1, 0, 0, 1}), {0, 2}}, hp, cfg), RangeError);
}

TEST_CASE("fixed point train_step stays within the truncation bound of the exact oracle") {
  Rng rng(2024);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t m = 1 + rng.below(4);
    const std::size_t B = 1 + rng.below(5);
    const auto hp = testing::make_hp(rng.uniform(0.01, 1.0), B, n, m, cfg);
    const auto model = testing::random_model(rng, n, m, 2.0, cfg);
    const auto batch = testing::random_batch(rng, B, n, m, 2.0, cfg);

    const auto fixed = train_step(model, batch, hp, cfg);
    const auto exact = reference_train_step(to_real<mpq_class>(model, cfg), to_real<mpq_class>(batch, cfg),
                                            to_real<mpq_class>(hp.alpha_eff(), cfg));
    const double bound = static_cast<double>(n * B + B + 4) / S;
    for (std::size_t e = 0; e < n * m; ++e) {
      CHECK(std::fabs(fx::decode(fixed.weights()[e], cfg) - to_double(exact.weights[e])) <= bound);
    }
    for (std::size_t j = 0; j < m; ++j) {
      CHECK(std::fabs(fx::decode(fixed.biases()[j], cfg) - to_double(exact.biases[j])) <= bound);
    }
    CHECK(fixed.inputs() == n);
    CHECK(fixed.classes() == m);
  }
}

TEST_CASE("n=m=B=2 instance within 4/S of the exact oracle") {
  Rng rng(99);
  const auto hp = testing::make_hp(0.3, 2, 2, 2, cfg);
  const auto model = testing::random_model(rng, 2, 2, 1.0, cfg);
  const auto batch = testing::random_batch(rng, 2, 2, 2, 1.0, cfg);
  const auto fixed = train_step(model, batch, hp, cfg);
  const auto exact = reference_train_step(to_real<mpq_class>(model, cfg), to_real<mpq_class>(batch, cfg),
                                          to_real<mpq_class>(hp.alpha_eff(), cfg));
  for (std::size_t e = 0; e < 4; ++e) {
    CHECK(std::fabs(fx::decode(fixed.weights()[e], cfg) - to_double(exact.weights[e])) <= 4.0 / S);
  }
}

TEST_CASE("reference train_step ignores sample order") {
  Rng rng(8);
  const auto model = to_real<mpq_class>(testing::random_model(rng, 3, 3, 1.0, cfg), cfg);
  auto batch = to_real<mpq_class>(testing::random_batch(rng, 4, 3, 3, 1.0, cfg), cfg);
  const mpq_class alpha(1, 7);
  const auto a = reference_train_step(model, batch, alpha);
  // reverse the samples
  RealBatch<mpq_class> reversed{batch.n, {}, {}};
  for (std::size_t k = batch.size(); k-- > 0;) {
    for (std::size_t i = 0; i < batch.n; ++i) reversed.inputs.push_back(batch.inputs[k * batch.n + i]);
    reversed.labels.push_back(batch.labels[k]);
  }
  const auto b = reference_train_step(model, reversed, alpha);
  CHECK(a.weights == b.weights);
  CHECK(a.biases == b.biases);
}

TEST_CASE("reference update matches central finite differences") {
  Rng rng(31337);
  const double h = 1e-5;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(4);
    const std::size_t m = 1 + rng.below(4);
    const std::size_t B = 1 + rng.below(4);
    RealModel<double> model{n, m, std::vector<double>(n * m), std::vector<double>(m)};
    for (auto& w : model.weights) w = rng.uniform(-1, 1);
    for (auto& b : model.biases) b = rng.uniform(-1, 1);
    RealBatch<double> batch{n, {}, {}};
    for (std::size_t k = 0; k < B * n; ++k) batch.inputs.push_back(rng.uniform(-2, 2));
    for (std::size_t k = 0; k < B; ++k) batch.labels.push_back(static_cast<std::uint32_t>(rng.below(m)));
    const double alpha_eff = rng.uniform(0.05, 1.0);
    const auto next = reference_train_step(model, batch, alpha_eff);

    auto check = [&](double& param, double updated, double original) {
      const double saved = param;
      param = saved + h;
      const double up = reference_objective(model, batch);
      param = saved - h;
      const double down = reference_objective(model, batch);
      param = saved;
      const double fd = (up - down) / (2 * h);
      const double analytic = (original - updated) / alpha_eff;
      const double rel = std::fabs(analytic - fd) / std::max({std::fabs(analytic), std::fabs(fd), 1e-3});
      worst = std::max(worst, rel);
      CHECK(rel < 1e-6);
    };
    for (std::size_t e = 0; e < n * m; ++e) check(model.weights[e], next.weights[e], model.weights[e]);
    for (std::size_t j = 0; j < m; ++j) check(model.biases[j], next.biases[j], model.biases[j]);
  }
  MESSAGE("worst relative error " << worst);
}

TEST_CASE("accuracy") {
  const auto hp_n = 2;
  SUBCASE("perfect model") {
    Model model(2, 2, vec({1, 0, 0, 1}), vec({0, 0}));
    LabeledSet data{2, vec({1, 0, 0, 1, 2, 1}), {0, 1, 0}};
    CHECK(accuracy(model, data, cfg) == 1.0);
  }
  SUBCASE("constant model on balanced labels") {
    Model model(hp_n, 2);
    LabeledSet data{2, vec({1, 0, 0, 1, 2, 1, 3, 3}), {0, 1, 0, 1}};
    CHECK(accuracy(model, data, cfg) == 0.5);
  }
  SUBCASE("random model on random labels") {
    Rng rng(4);
    const auto model = testing::random_model(rng, 9, 6, 1.0, cfg);
    LabeledSet data{9, {}, {}};
    for (int k = 0; k < 5000; ++k) {
      for (int i = 0; i < 9; ++i) data.features.push_back(testing::random_fx(rng, 1.0, cfg));
      data.labels.push_back(static_cast<std::uint32_t>(rng.below(6)));
    }
    CHECK(std::fabs(accuracy(model, data, cfg) - 1.0 / 6) <= 0.05);
  }
  CHECK_THROWS_AS(accuracy(Model(2, 2), LabeledSet{2, {}, {}}, cfg), EmptyDataError);
}

TEST_CASE("model JSON round trip and digest") {
  Rng rng(12);
  const auto model = testing::random_model(rng, 3, 2, 5.0, cfg);
  const auto j = model_to_json(model, cfg);
  CHECK(j.at("n") == 3);
  CHECK(j.at("m") == 2);
  CHECK(j.at("scale_bits") == 16);
  CHECK(j.at("weights").size() == 3);
  CHECK(j.at("weights")[0].size() == 2);
  CHECK(j.at("biases").size() == 2);
  CHECK(j.at("biases")[0][0].is_string());
  CHECK(model_from_json(j, cfg) == model);
  CHECK(model_digest_hex(model, cfg) == to_hex(sha256(j.dump())));
  CHECK(model_digest_hex(model, cfg).size() == 64);

  auto other = model;
  other.set_bias(0, fx::fx_add(other.bias(0), FxNum::from_parts(1, false), cfg));
  CHECK(model_digest(other, cfg) != model_digest(model, cfg));
}

TEST_CASE("FxNum wire form") {
  CHECK(fx_to_json(v(-1.5)) == nlohmann::json::array({"98304", 1}));
  CHECK(fx_from_json(nlohmann::json::array({"98304", 0}), cfg) == v(1.5));
  CHECK_THROWS(fx_from_json(nlohmann::json::array({"0", 1}), cfg));
  CHECK_THROWS(fx_from_json(nlohmann::json::array({"12x", 0}), cfg));
  CHECK_THROWS(fx_from_json(nlohmann::json::array({"1", 2}), cfg));
  CHECK_THROWS_AS(fx_from_json(nlohmann::json::array({"281474976710656", 0}), cfg), OverflowError);
}

TEST_CASE("model JSON rejects bad shapes") {
  auto j = model_to_json(Model(2, 2), cfg);
  j["weights"][1].erase(0);
  CHECK_THROWS_AS(model_from_json(j, cfg), ConfigError);
  auto k = model_to_json(Model(2, 2), cfg);
  k["scale_bits"] = 12;
  CHECK_THROWS_AS(model_from_json(k, cfg), ConfigError);
}
