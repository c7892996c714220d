#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "zkfl/dataset.hpp"
#include "zkfl/errors.hpp"
#include "zkfl/experiment.hpp"
#include "zkfl/ledger.hpp"
#include "zkfl/proof.hpp"
#include "zkfl/training_circuit.hpp"

namespace py = pybind11;
using namespace zkfl;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

nlohmann::json from_py(const py::handle& obj) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(obj).cast<std::string>());
}

nn::Model model_from_floats(const std::vector<std::vector<double>>& weights, const std::vector<double>& biases,
                            const fx::FxConfig& cfg) {
  const std::size_t n = weights.size();
  const std::size_t m = biases.size();
  nn::Model model(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i].size() != m) throw ConfigError("weight rows must have one entry per bias");
    for (std::size_t j = 0; j < m; ++j) model.set_weight(i, j, fx::encode(weights[i][j], cfg));
  }
  for (std::size_t j = 0; j < m; ++j) model.set_bias(j, fx::encode(biases[j], cfg));
  return model;
}

nn::Batch batch_from_floats(const std::vector<std::vector<double>>& rows, const std::vector<std::uint32_t>& labels,
                            const fx::FxConfig& cfg) {
  if (rows.size() != labels.size()) throw ConfigError("one label per row required");
  nn::Batch b;
  b.n = rows.empty() ? 0 : rows.front().size();
  for (const auto& r : rows) {
    if (r.size() != b.n) throw ConfigError("ragged batch rows");
    for (double x : r) b.inputs.push_back(fx::encode(x, cfg));
  }
  b.labels = labels;
  return b;
}

nlohmann::json run_summary_json(const experiment::RunSummary& s) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& m : s.metrics) {
    metrics.push_back({{"cycle", m.cycle},
                       {"accuracy", m.accuracy},
                       {"accepted", m.accepted},
                       {"rejected", m.rejected},
                       {"cumulative_cost", m.cumulative_cost}});
  }
  nlohmann::json j = {{"metrics", metrics}, {"committed_digests", s.committed_digests}};
  j["cycles_to_target"] = s.cycles_to_target ? nlohmann::json(*s.cycles_to_target) : nlohmann::json(nullptr);
  return j;
}

}  // namespace

PYBIND11_MODULE(_zkfl, m) {
  m.doc() = "Verifiable federated learning: fixed-point training, proofs and a learning ledger.";

  static py::exception<Error> error(m, "Error");
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<OverflowError>(m, "OverflowError", error.ptr());
  py::register_exception<FormatError>(m, "FormatError", error.ptr());
  py::register_exception<ArtifactMismatch>(m, "ArtifactMismatch", error.ptr());
  py::register_exception<MissingMetrics>(m, "MissingMetrics", error.ptr());

  // fixed point
  py::class_<fx::FxConfig>(m, "FxConfig")
      .def(py::init([](unsigned scale_bits, unsigned magnitude_bits) {
             fx::FxConfig c;
             c.scale_bits = scale_bits;
             c.magnitude_bits = magnitude_bits;
             c.validate();
             return c;
           }),
           py::arg("scale_bits") = 16, py::arg("magnitude_bits") = 48)
      .def_readonly("scale_bits", &fx::FxConfig::scale_bits)
      .def_readonly("magnitude_bits", &fx::FxConfig::magnitude_bits)
      .def_property_readonly("scale", &fx::FxConfig::scale);

  py::class_<fx::FxNum>(m, "FxNum")
      .def_property_readonly("magnitude", &fx::FxNum::magnitude)
      .def_property_readonly("negative", &fx::FxNum::negative)
      .def(py::self == py::self)
      .def("__repr__", [](fx::FxNum a) {
        return "FxNum(" + std::to_string(a.magnitude()) + (a.negative() ? ", negative)" : ")");
      });
  m.def("encode", &fx::encode, py::arg("x"), py::arg("cfg") = fx::FxConfig{});
  m.def("decode", &fx::decode, py::arg("a"), py::arg("cfg") = fx::FxConfig{});
  m.def("fx_add", &fx::fx_add, py::arg("a"), py::arg("b"), py::arg("cfg") = fx::FxConfig{});
  m.def("fx_mul", &fx::fx_mul, py::arg("a"), py::arg("b"), py::arg("cfg") = fx::FxConfig{});

  // model and training
  py::class_<nn::Model>(m, "Model")
      .def(py::init<std::size_t, std::size_t>(), py::arg("n_inputs"), py::arg("n_classes"))
      .def_static("from_floats", &model_from_floats, py::arg("weights"), py::arg("biases"),
                  py::arg("cfg") = fx::FxConfig{})
      .def_property_readonly("n_inputs", &nn::Model::inputs)
      .def_property_readonly("n_classes", &nn::Model::classes)
      .def("weights", [](const nn::Model& model, const fx::FxConfig& cfg) {
             std::vector<std::vector<double>> out(model.inputs(), std::vector<double>(model.classes()));
             for (std::size_t i = 0; i < model.inputs(); ++i)
               for (std::size_t j = 0; j < model.classes(); ++j) out[i][j] = fx::decode(model.weight(i, j), cfg);
             return out;
           }, py::arg("cfg") = fx::FxConfig{})
      .def("biases", [](const nn::Model& model, const fx::FxConfig& cfg) {
             std::vector<double> out;
             for (auto b : model.biases()) out.push_back(fx::decode(b, cfg));
             return out;
           }, py::arg("cfg") = fx::FxConfig{})
      .def("to_json", [](const nn::Model& model, const fx::FxConfig& cfg) { return to_py(nn::model_to_json(model, cfg)); },
           py::arg("cfg") = fx::FxConfig{})
      .def_static("from_json", [](const py::object& j, const fx::FxConfig& cfg) { return nn::model_from_json(from_py(j), cfg); },
                  py::arg("j"), py::arg("cfg") = fx::FxConfig{})
      .def("digest", [](const nn::Model& model, const fx::FxConfig& cfg) { return nn::model_digest_hex(model, cfg); },
           py::arg("cfg") = fx::FxConfig{})
      .def(py::self == py::self);

  py::class_<nn::Batch>(m, "Batch")
      .def_static("from_floats", &batch_from_floats, py::arg("rows"), py::arg("labels"),
                  py::arg("cfg") = fx::FxConfig{})
      .def_property_readonly("size", &nn::Batch::size)
      .def_readonly("n_inputs", &nn::Batch::n)
      .def_readonly("labels", &nn::Batch::labels);

  py::class_<nn::Hyperparams>(m, "Hyperparams")
      .def(py::init([](double alpha, std::size_t batch_size, std::size_t n_inputs, std::size_t n_classes,
                       const fx::FxConfig& cfg) {
             nn::Hyperparams hp;
             hp.alpha = fx::encode(alpha, cfg);
             hp.batch_size = batch_size;
             hp.n_inputs = n_inputs;
             hp.n_classes = n_classes;
             return hp;
           }),
           py::arg("alpha") = experiment::kDefaultAlpha, py::arg("batch_size") = 10, py::arg("n_inputs") = 9,
           py::arg("n_classes") = 6, py::arg("cfg") = fx::FxConfig{})
      .def_readonly("alpha", &nn::Hyperparams::alpha)
      .def_readonly("batch_size", &nn::Hyperparams::batch_size)
      .def_readonly("n_inputs", &nn::Hyperparams::n_inputs)
      .def_readonly("n_classes", &nn::Hyperparams::n_classes)
      .def("alpha_eff", &nn::Hyperparams::alpha_eff);

  m.def("train_step", &nn::train_step, py::arg("model"), py::arg("batch"), py::arg("hp"),
        py::arg("cfg") = fx::FxConfig{});
  m.def("predict", [](const nn::Model& model, const std::vector<double>& x, const fx::FxConfig& cfg) {
        std::vector<fx::FxNum> enc;
        for (double v : x) enc.push_back(fx::encode(v, cfg));
        return nn::predict(nn::forward(model, enc, cfg));
      }, py::arg("model"), py::arg("x"), py::arg("cfg") = fx::FxConfig{});

  // circuit and proofs
  py::class_<circuit::Witness>(m, "Witness").def("__len__", [](const circuit::Witness& w) { return w.values.size(); });

  py::class_<circuit::TrainingCircuit, std::shared_ptr<circuit::TrainingCircuit>>(m, "TrainingCircuit")
      .def_property_readonly("num_constraints", [](const circuit::TrainingCircuit& c) { return c.system().num_constraints(); })
      .def_property_readonly("num_variables", [](const circuit::TrainingCircuit& c) { return c.system().num_variables(); })
      .def_property_readonly("num_public", [](const circuit::TrainingCircuit& c) { return c.system().num_public(); })
      .def_property_readonly("digest", [](const circuit::TrainingCircuit& c) { return to_hex(c.system().digest()); })
      .def("compute_witness", [](const circuit::TrainingCircuit& c, const nn::Model& model, fx::FxNum alpha_eff,
                                 const nn::Batch& batch) {
             auto r = c.compute_witness(model, alpha_eff, batch);
             return py::make_tuple(std::move(r.witness), std::move(r.updated));
           })
      .def("extract_updated", &circuit::TrainingCircuit::extract_updated);

  m.def("compile_circuit", [](const nn::Hyperparams& hp, const fx::FxConfig& cfg) {
        return std::make_shared<circuit::TrainingCircuit>(circuit::compile(hp, cfg));
      }, py::arg("hp"), py::arg("cfg") = fx::FxConfig{});
  m.def("expected_constraint_count", [](std::uint32_t B, std::uint32_t n, std::uint32_t mm, const fx::FxConfig& cfg) {
        return circuit::expected_constraint_count(circuit::CircuitShape{B, n, mm, cfg});
      }, py::arg("batch_size"), py::arg("n_inputs"), py::arg("n_classes"), py::arg("cfg") = fx::FxConfig{});

  py::class_<circuit::KeyPair>(m, "KeyPair")
      .def_property_readonly("backend", [](const circuit::KeyPair& k) { return k.proving_key.backend; });
  py::class_<circuit::Proof>(m, "Proof")
      .def_readonly("backend", &circuit::Proof::backend)
      .def_property_readonly("payload_size", [](const circuit::Proof& p) { return p.payload.size(); });

  m.def("backend_ids", [] {
    std::vector<std::string> out;
    for (auto id : circuit::backend_ids()) out.emplace_back(id);
    return out;
  });
  m.def("setup_keys", [](const circuit::TrainingCircuit& c, const std::string& backend) {
        return circuit::backend_by_id(backend).setup(c.shared_system());
      }, py::arg("circuit"), py::arg("backend") = std::string(circuit::WitnessReplayBackend::kId));
  m.def("prove", [](const circuit::TrainingCircuit& c, const circuit::Witness& w, const circuit::KeyPair& keys) {
        return circuit::backend_by_id(keys.proving_key.backend).prove(c.system(), w, keys.proving_key);
      }, py::arg("circuit"), py::arg("witness"), py::arg("keys"));
  m.def("verify", [](const circuit::TrainingCircuit& c, const circuit::KeyPair& keys, const nn::Model& old_model,
                     fx::FxNum alpha_eff, const nn::Model& new_model, const circuit::Proof& proof) {
        const auto pub = c.public_inputs(old_model, alpha_eff, new_model);
        return std::string(circuit::to_string(
            circuit::backend_by_id(keys.verification_key.backend).check(keys.verification_key, pub, proof)));
      }, py::arg("circuit"), py::arg("keys"), py::arg("old_model"), py::arg("alpha_eff"), py::arg("new_model"),
      py::arg("proof"), "Returns the verification status name, e.g. 'accepted'.");

  // ledger
  m.def("account_address", &ledger::account_address);

  py::class_<ledger::UpdateTx>(m, "UpdateTx")
      .def(py::init([](ledger::Address sender, nn::Model model, circuit::Proof proof, std::string old_digest) {
             return ledger::UpdateTx{std::move(sender), std::move(model), std::move(proof), std::move(old_digest)};
           }),
           py::arg("sender"), py::arg("local_model"), py::arg("proof"), py::arg("old_model_digest"))
      .def_readwrite("sender", &ledger::UpdateTx::sender)
      .def_readwrite("local_model", &ledger::UpdateTx::local_model)
      .def_readwrite("old_model_digest", &ledger::UpdateTx::old_model_digest);

  py::class_<ledger::LearningContract>(m, "LearningContract")
      .def_static("deploy", [](const nn::Hyperparams& hp, const fx::FxConfig& cfg, const circuit::KeyPair& keys,
                               std::vector<ledger::Address> accounts, std::uint64_t cycle_length_blocks) {
             ledger::DeployConfig d;
             d.hp = hp;
             d.fx = cfg;
             d.verification_key = keys.verification_key;
             d.accounts = std::move(accounts);
             d.cycle_length_blocks = cycle_length_blocks;
             return ledger::LearningContract::deploy(d);
           },
           py::arg("hp"), py::arg("cfg"), py::arg("keys"), py::arg("accounts"), py::arg("cycle_length_blocks") = 100)
      .def("submit_update", [](ledger::LearningContract& l, const ledger::UpdateTx& tx) {
             const auto r = l.submit_update(tx);
             py::dict out;
             out["tx_id"] = r.tx_id;
             out["accepted"] = r.accepted();
             out["reason"] = r.rejection ? py::cast(std::string(ledger::to_string(*r.rejection))) : py::none();
             out["cost"] = r.cost;
             return out;
           })
      .def("advance_block", &ledger::LearningContract::advance_block, py::arg("k") = 1)
      .def("blocks_until_boundary", &ledger::LearningContract::blocks_until_boundary)
      .def("read_global", &ledger::LearningContract::read_global)
      .def_property_readonly("committed_digest", &ledger::LearningContract::committed_digest)
      .def_property_readonly("cycle_index", [](const ledger::LearningContract& l) { return l.state().cycle_index; })
      .def("state_digest", &ledger::LearningContract::state_digest)
      .def("events", [](const ledger::LearningContract& l) {
        py::list out;
        for (const auto& e : l.events()) out.append(to_py(e));
        return out;
      });

  // data
  m.def("synthesize", [](std::size_t n_nodes, std::size_t per_node, std::uint64_t seed, double skew, double separation,
                         double noise) {
        data::SynthOptions o;
        o.skew = skew;
        o.separation = separation;
        o.noise = noise;
        py::list shards;
        for (const auto& s : data::synthesize(n_nodes, per_node, seed, o)) {
          std::vector<std::vector<double>> rows;
          std::vector<std::uint32_t> labels;
          for (const auto& d : s) {
            rows.push_back(d.features);
            labels.push_back(d.label);
          }
          shards.append(py::make_tuple(rows, labels));
        }
        return shards;
      }, py::arg("n_nodes"), py::arg("per_node"), py::arg("seed"), py::arg("skew") = 0.0, py::arg("separation") = 3.0,
      py::arg("noise") = 1.0, "One (rows, labels) pair per node.");

  // experiments
  m.def("default_config", [] { return to_py(experiment::ExperimentConfig{}.to_json()); });
  m.def("setup", [](const py::object& config) {
        const auto s = experiment::cmd_setup(experiment::ExperimentConfig::from_json(from_py(config)));
        py::dict out;
        out["constraints"] = s.constraints;
        out["variables"] = s.variables;
        out["public_inputs"] = s.public_inputs;
        out["cs_digest"] = s.cs_digest;
        return out;
      }, py::arg("config"), "Writes setup artifacts into config['out'].");
  m.def("run", [](const py::object& config) {
        const auto cfg = experiment::ExperimentConfig::from_json(from_py(config));
        experiment::RunSummary s;
        {
          py::gil_scoped_release release;
          s = experiment::cmd_run(cfg);
        }
        return to_py(run_summary_json(s));
      }, py::arg("config"));
  m.def("report", [](const std::filesystem::path& dir) {
        std::ostringstream out;
        experiment::cmd_report(dir, out);
        return out.str();
      }, py::arg("dir"));
}
