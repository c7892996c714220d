#include "zkfl/training_circuit.hpp"

#include <bit>

#include "zkfl/errors.hpp"

namespace zkfl::circuit {

namespace {

std::string idx(std::string_view base, std::initializer_list<std::size_t> indices) {
  std::string s(base);
  s += '[';
  bool first = true;
  for (auto i : indices) {
    if (!first) s += ',';
    s += std::to_string(i);
    first = false;
  }
  s += ']';
  return s;
}

void check_shape(const CircuitShape& shape, const PrimeField& field) {
  if (shape.batch_size == 0 || shape.n_inputs == 0 || shape.n_classes == 0) {
    throw ConfigError("circuit dimensions must be positive");
  }
  shape.fx.validate(field.bits());
  // p > 2^(2M+2): an un-rescaled product plus sign headroom never wraps.
  if (field.bits() <= 2 * shape.fx.magnitude_bits + 2) {
    throw ConfigError("field modulus too small for magnitude_bits");
  }
}

void assign_fx(std::vector<FieldElement>& z, Var mag, Var sign, std::size_t offset, fx::FxNum v) {
  z[mag + offset] = {v.magnitude()};
  z[sign + offset] = {v.negative() ? u128{1} : u128{0}};
}

fx::FxNum read_fx(const std::vector<FieldElement>& z, Var mag, Var sign, std::size_t offset,
                  const fx::FxConfig& cfg) {
  const u128 m = z[mag + offset].value;
  const u128 s = z[sign + offset].value;
  if (m >= cfg.magnitude_limit() || s > 1) throw OverflowError("witness holds a malformed fixed-point wire");
  return fx::FxNum::from_parts(static_cast<std::uint64_t>(m), s == 1);
}

}  // namespace

TrainingCircuit compile(const CircuitShape& shape, const PrimeField& field) {
  check_shape(shape, field);
  const std::size_t batch = shape.batch_size;
  const std::size_t n = shape.n_inputs;
  const std::size_t m = shape.n_classes;
  const auto nm = static_cast<std::uint32_t>(n * m);
  const auto mm = static_cast<std::uint32_t>(m);

  CircuitBuilder cb(field, shape);
  TrainingLayout L{};
  L.w_old_mag = cb.allocate_block("w_old.mag", nm);
  L.w_old_sign = cb.allocate_block("w_old.sign", nm);
  L.b_old_mag = cb.allocate_block("b_old.mag", mm);
  L.b_old_sign = cb.allocate_block("b_old.sign", mm);
  L.alpha_mag = cb.allocate("alpha_eff.mag");
  L.alpha_sign = cb.allocate("alpha_eff.sign");
  L.w_new_mag = cb.allocate_block("w_new.mag", nm);
  L.w_new_sign = cb.allocate_block("w_new.sign", nm);
  L.b_new_mag = cb.allocate_block("b_new.mag", mm);
  L.b_new_sign = cb.allocate_block("b_new.sign", mm);
  cb.end_public_inputs();

  const auto bn = static_cast<std::uint32_t>(batch * n);
  L.x_mag = cb.allocate_block("x.mag", bn);
  L.x_sign = cb.allocate_block("x.sign", bn);
  L.labels = cb.allocate_block("y.onehot", static_cast<std::uint32_t>(batch * m));

  auto w_old = [&](std::size_t i, std::size_t j) {
    const auto o = static_cast<Var>(i * m + j);
    return SignedWire{L.w_old_mag + o, L.w_old_sign + o};
  };
  auto b_old = [&](std::size_t j) { return SignedWire{L.b_old_mag + static_cast<Var>(j), L.b_old_sign + static_cast<Var>(j)}; };
  auto x = [&](std::size_t k, std::size_t i) {
    const auto o = static_cast<Var>(k * n + i);
    return SignedWire{L.x_mag + o, L.x_sign + o};
  };
  auto label = [&](std::size_t k, std::size_t j) { return L.labels + static_cast<Var>(k * m + j); };
  const SignedWire alpha{L.alpha_mag, L.alpha_sign};

  // Private inputs: well-formed fixed-point features and one-hot labels.
  for (std::size_t k = 0; k < batch; ++k) {
    for (std::size_t i = 0; i < n; ++i) constrain_fixed_input(cb, x(k, i), idx("x", {k, i}));
    Lc row_sum;
    for (std::size_t j = 0; j < m; ++j) {
      enforce_boolean(cb, label(k, j));
      row_sum += Lc(label(k, j));
    }
    cb.enforce(row_sum, Lc::constant(1), Lc::constant(1));
  }

  std::vector<Lc> b_value(m);
  for (std::size_t j = 0; j < m; ++j) b_value[j] = signed_value(cb, b_old(j), idx("b_old", {j}));

  // Forward pass and per-sample error terms delta_kj = (yhat_kj - y_kj) / m.
  const auto scale = static_cast<i128>(shape.fx.scale());
  std::vector<SignedWire> delta(batch * m);
  std::vector<Lc> delta_value(batch * m);
  for (std::size_t k = 0; k < batch; ++k) {
    for (std::size_t j = 0; j < m; ++j) {
      Lc yhat = b_value[j];
      for (std::size_t i = 0; i < n; ++i) {
        const auto name = idx("fwd", {k, j, i});
        yhat += signed_value(cb, fixed_mul(cb, x(k, i), w_old(i, j), name), name);
      }
      const auto diff = decompose_signed(cb, yhat - scale * Lc(label(k, j)), idx("diff", {k, j}));
      const auto name = idx("delta", {k, j});
      delta[k * m + j] = divide_signed(cb, diff, m, name);
      delta_value[k * m + j] = signed_value(cb, delta[k * m + j], name);
    }
  }

  // Weight update: w' = w - alpha_eff * sum_k delta_kj x_ki.
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      Lc grad;
      for (std::size_t k = 0; k < batch; ++k) {
        const auto name = idx("bwd", {k, i, j});
        grad += signed_value(cb, fixed_mul(cb, delta[k * m + j], x(k, i), name), name);
      }
      const auto g = decompose_signed(cb, grad, idx("grad_w", {i, j}));
      const auto step_name = idx("step_w", {i, j});
      const Lc step = signed_value(cb, fixed_mul(cb, alpha, g, step_name), step_name);
      const Lc w_value = signed_value(cb, w_old(i, j), idx("w_old", {i, j}));
      const auto o = static_cast<Var>(i * m + j);
      const SignedWire target{L.w_new_mag + o, L.w_new_sign + o};
      decompose_signed(cb, w_value - step, idx("w_new", {i, j}), &target);
    }
  }

  // Bias update: b' = b - alpha_eff * sum_k delta_kj.
  for (std::size_t j = 0; j < m; ++j) {
    Lc grad;
    for (std::size_t k = 0; k < batch; ++k) grad += delta_value[k * m + j];
    const auto g = decompose_signed(cb, grad, idx("grad_b", {j}));
    const auto step_name = idx("step_b", {j});
    const Lc step = signed_value(cb, fixed_mul(cb, alpha, g, step_name), step_name);
    const SignedWire target{L.b_new_mag + static_cast<Var>(j), L.b_new_sign + static_cast<Var>(j)};
    decompose_signed(cb, b_value[j] - step, idx("b_new", {j}), &target);
  }

  auto compiled = std::move(cb).finish();
  TrainingCircuit tc;
  tc.system_ = std::make_shared<const ConstraintSystem>(std::move(compiled.system));
  tc.program_ = std::make_shared<const WitnessProgram>(std::move(compiled.program));
  tc.layout_ = L;
  return tc;
}

TrainingCircuit compile(const nn::Hyperparams& hp, const fx::FxConfig& cfg, const PrimeField& field) {
  CircuitShape shape;
  shape.batch_size = static_cast<std::uint32_t>(hp.batch_size);
  shape.n_inputs = static_cast<std::uint32_t>(hp.n_inputs);
  shape.n_classes = static_cast<std::uint32_t>(hp.n_classes);
  shape.fx = cfg;
  return compile(shape, field);
}

std::vector<FieldElement> encode_public_inputs(const CircuitShape& shape, const nn::Model& old_model,
                                               fx::FxNum alpha_eff, const nn::Model& new_model) {
  for (const auto* model : {&old_model, &new_model}) {
    if (model->inputs() != shape.n_inputs || model->classes() != shape.n_classes) {
      throw ConfigError("model shape does not match circuit");
    }
  }
  std::vector<FieldElement> out;
  out.reserve(4 * old_model.weights().size() + 4 * old_model.biases().size() + 2);
  auto push = [&](std::span<const fx::FxNum> values) {
    for (auto v : values) out.push_back({v.magnitude()});
    for (auto v : values) out.push_back({v.negative() ? u128{1} : u128{0}});
  };
  push(old_model.weights());
  push(old_model.biases());
  push(std::span(&alpha_eff, 1));
  push(new_model.weights());
  push(new_model.biases());
  return out;
}

std::vector<FieldElement> TrainingCircuit::public_inputs(const nn::Model& old_model, fx::FxNum alpha_eff,
                                                         const nn::Model& new_model) const {
  return encode_public_inputs(shape(), old_model, alpha_eff, new_model);
}

TrainingCircuit::Result TrainingCircuit::compute_witness(const nn::Model& old_model, fx::FxNum alpha_eff,
                                                         const nn::Batch& batch) const {
  const auto& s = shape();
  if (old_model.inputs() != s.n_inputs || old_model.classes() != s.n_classes) {
    throw ConfigError("model shape does not match circuit");
  }
  if (batch.n != s.n_inputs || batch.size() != s.batch_size || batch.inputs.size() != batch.size() * batch.n) {
    throw ConfigError("batch shape does not match circuit");
  }
  const auto& cfg = s.fx;
  auto check = [&](fx::FxNum v) {
    if (v.magnitude() >= cfg.magnitude_limit()) throw OverflowError("input exceeds magnitude bound");
  };

  std::vector<FieldElement> z(system_->num_variables());
  z[kOneWire] = system_->field().one();
  const std::size_t nm = std::size_t{s.n_inputs} * s.n_classes;
  for (std::size_t e = 0; e < nm; ++e) {
    check(old_model.weights()[e]);
    assign_fx(z, layout_.w_old_mag, layout_.w_old_sign, e, old_model.weights()[e]);
  }
  for (std::size_t j = 0; j < s.n_classes; ++j) {
    check(old_model.biases()[j]);
    assign_fx(z, layout_.b_old_mag, layout_.b_old_sign, j, old_model.biases()[j]);
  }
  check(alpha_eff);
  assign_fx(z, layout_.alpha_mag, layout_.alpha_sign, 0, alpha_eff);
  for (std::size_t e = 0; e < batch.inputs.size(); ++e) {
    check(batch.inputs[e]);
    assign_fx(z, layout_.x_mag, layout_.x_sign, e, batch.inputs[e]);
  }
  for (std::size_t k = 0; k < batch.size(); ++k) {
    if (batch.labels[k] >= s.n_classes) throw RangeError("batch label outside [0, m)");
    z[layout_.labels + k * s.n_classes + batch.labels[k]] = system_->field().one();
  }

  program_->run(z, *system_);
  Witness w{std::move(z)};
  auto updated = extract_updated(w);
  return {std::move(w), std::move(updated)};
}

nn::Model TrainingCircuit::extract_updated(const Witness& witness) const {
  const auto& s = shape();
  if (witness.values.size() != system_->num_variables()) throw ConfigError("witness length mismatch");
  nn::Model model(s.n_inputs, s.n_classes);
  const std::size_t nm = std::size_t{s.n_inputs} * s.n_classes;
  for (std::size_t e = 0; e < nm; ++e) {
    model.weights()[e] = read_fx(witness.values, layout_.w_new_mag, layout_.w_new_sign, e, s.fx);
  }
  for (std::size_t j = 0; j < s.n_classes; ++j) {
    model.biases()[j] = read_fx(witness.values, layout_.b_new_mag, layout_.b_new_sign, j, s.fx);
  }
  return model;
}

std::size_t expected_constraint_count(const CircuitShape& shape) {
  const std::size_t B = shape.batch_size;
  const std::size_t n = shape.n_inputs;
  const std::size_t m = shape.n_classes;
  const std::size_t M = shape.fx.magnitude_bits;
  const std::size_t K = shape.fx.scale_bits;
  const std::size_t d = static_cast<std::size_t>(std::bit_width(m - 1));

  const std::size_t input = M + 5;              // boolean, range, is-nonzero, canonical zero
  const std::size_t mul = M + K + 8 + 1;        // fixed_mul plus its signed-value product
  const std::size_t decompose = M + 6;
  const std::size_t divide = std::has_single_bit(m) ? M + d + 6 : M + 2 * d + 7;

  const std::size_t per_sample = n * input + m + 1          // features, label bits, one-hot sum
                                 + m * (n * mul + decompose + divide + 1)  // forward, diff, delta
                                 + n * m * mul;                 // backward products
  const std::size_t fixed = m                                   // old bias signed values
                            + n * m * (decompose + mul + 1 + decompose)  // grad, step, old weight value, new
                            + m * (decompose + mul + decompose);
  return B * per_sample + fixed;
}

}  // namespace zkfl::circuit
