#pragma once

#include <memory>
#include <vector>

#include "zkfl/builder.hpp"
#include "zkfl/gadgets.hpp"
#include "zkfl/neuralnet.hpp"

namespace zkfl::circuit {

/// Full variable assignment; values[0] is the constant one.
struct Witness {
  std::vector<FieldElement> values;
};

/// Wire blocks of the training circuit. Each block is laid out row-major in
/// the same order as the corresponding Model or Batch storage.
struct TrainingLayout {
  // public
  Var w_old_mag, w_old_sign;
  Var b_old_mag, b_old_sign;
  Var alpha_mag, alpha_sign;
  Var w_new_mag, w_new_sign;
  Var b_new_mag, b_new_sign;
  // private inputs
  Var x_mag, x_sign;
  Var labels;  // one-hot bits, B*m
};

/// Constraint system for one train_step plus the hints that let an honest
/// prover fill in every intermediate wire.
class TrainingCircuit {
 public:
  const ConstraintSystem& system() const { return *system_; }
  std::shared_ptr<const ConstraintSystem> shared_system() const { return system_; }
  const TrainingLayout& layout() const { return layout_; }
  const CircuitShape& shape() const { return system_->shape(); }
  const fx::FxConfig& fx() const { return system_->shape().fx; }

  /// Public wires 1..num_public: old model, alpha_eff, new model.
  std::vector<FieldElement> public_inputs(const nn::Model& old_model, fx::FxNum alpha_eff,
                                          const nn::Model& new_model) const;

  struct Result {
    Witness witness;
    nn::Model updated;
  };

  /// Runs the training step inside the circuit. Throws OverflowError when a
  /// value leaves its gadget range and ConfigError on shape mismatches.
  Result compute_witness(const nn::Model& old_model, fx::FxNum alpha_eff, const nn::Batch& batch) const;

  /// Reads the new-model wires back out of a witness.
  nn::Model extract_updated(const Witness& witness) const;

 private:
  friend TrainingCircuit compile(const CircuitShape& shape, const PrimeField& field);

  std::shared_ptr<const ConstraintSystem> system_;
  std::shared_ptr<const WitnessProgram> program_;
  TrainingLayout layout_{};
};

/// Public input vector for a circuit of this shape: old weights (magnitudes,
/// then signs), old biases, alpha_eff, new weights, new biases. Needs only the
/// shape, so a verifier can encode inputs without the compiled circuit.
std::vector<FieldElement> encode_public_inputs(const CircuitShape& shape, const nn::Model& old_model,
                                               fx::FxNum alpha_eff, const nn::Model& new_model);

/// Throws ConfigError if the fixed-point format does not fit the field.
TrainingCircuit compile(const CircuitShape& shape, const PrimeField& field = PrimeField());
TrainingCircuit compile(const nn::Hyperparams& hp, const fx::FxConfig& cfg, const PrimeField& field = PrimeField());

/// Closed-form constraint count of the compiled circuit (see docs/constraint_census.md).
std::size_t expected_constraint_count(const CircuitShape& shape);

}  // namespace zkfl::circuit
