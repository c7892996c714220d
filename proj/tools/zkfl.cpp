// zkfl: setup | run | report for the verifiable federated learning simulator.

#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "zkfl/errors.hpp"
#include "zkfl/experiment.hpp"

namespace {

using zkfl::experiment::ExperimentConfig;

struct Overrides {
  std::string config;
  std::size_t nodes = 0;
  std::size_t batch_size = 0;
  std::size_t cycles = 0;
  std::uint64_t seed = 0;
  double alpha = 0.0;
  unsigned scale_bits = 0;
  std::string dataset;
  std::size_t unit = 0;
  std::string out;
  std::vector<std::string> byzantine;
  std::vector<double> drop_late;
  std::string backend;
  std::uint64_t cycle_length = 0;
  std::string merge_table;
  std::size_t per_node = 0;
  double skew = 0.0;

  std::map<std::string, CLI::Option*> opts;
};

void add_experiment_flags(CLI::App* cmd, Overrides& o) {
  o.opts["config"] = cmd->add_option("--config", o.config, "JSON config file; flags override its values");
  o.opts["nodes"] = cmd->add_option("--nodes", o.nodes, "Number of honest learning nodes");
  o.opts["batch"] = cmd->add_option("--batch-size", o.batch_size, "Datapoints per training batch");
  o.opts["cycles"] = cmd->add_option("--cycles", o.cycles, "Updating cycles to simulate");
  o.opts["seed"] = cmd->add_option("--seed", o.seed, "Master seed");
  o.opts["alpha"] = cmd->add_option("--alpha", o.alpha, "Learning rate");
  o.opts["scale"] = cmd->add_option("--scale-bits", o.scale_bits, "Fixed-point fraction bits");
  o.opts["dataset"] = cmd->add_option("--dataset", o.dataset, "'synthetic' or a UCI activities directory");
  o.opts["unit"] = cmd->add_option("--unit", o.unit, "Sensor unit 0-4 (0 = torso)");
  o.opts["out"] = cmd->add_option("--out", o.out, "Output directory");
  o.opts["byz"] = cmd->add_option("--byzantine", o.byzantine, "<n>:<mode>, mode in corrupt_model|corrupt_witness|replay_proof")
                      ->take_all();
  o.opts["late"] = cmd->add_option("--drop-late", o.drop_late, "Probability a node misses the boundary (default 0.25)")
                       ->expected(0, 1)
                       ->default_str("0.25");
  o.opts["backend"] = cmd->add_option("--backend", o.backend, "Proof backend");
  o.opts["cycle_len"] = cmd->add_option("--cycle-length", o.cycle_length, "Blocks per cycle");
  o.opts["merge"] = cmd->add_option("--merge-table", o.merge_table, "Activity merge table JSON");
  o.opts["per_node"] = cmd->add_option("--synthetic-per-node", o.per_node, "Synthetic points per node");
  o.opts["skew"] = cmd->add_option("--synthetic-skew", o.skew, "Class-prior skew across synthetic nodes");
}

ExperimentConfig build_config(const Overrides& o) {
  auto given = [&](const char* k) { return o.opts.at(k)->count() > 0; };
  ExperimentConfig cfg = given("config") ? ExperimentConfig::load(o.config) : ExperimentConfig{};
  if (given("nodes")) cfg.n_nodes = o.nodes;
  if (given("batch")) cfg.batch_size = o.batch_size;
  if (given("cycles")) cfg.cycles = o.cycles;
  if (given("seed")) cfg.seed = o.seed;
  if (given("alpha")) cfg.alpha = o.alpha;
  if (given("scale")) cfg.fx.scale_bits = o.scale_bits;
  if (given("dataset")) cfg.dataset = o.dataset;
  if (given("unit")) cfg.unit = o.unit;
  if (given("out")) cfg.out = o.out;
  if (given("backend")) cfg.backend = o.backend;
  if (given("cycle_len")) cfg.cycle_length_blocks = o.cycle_length;
  if (given("merge")) cfg.merge_table = o.merge_table;
  if (given("per_node")) cfg.synthetic_per_node = o.per_node;
  if (given("skew")) cfg.synthetic_skew = o.skew;
  if (given("byz")) {
    cfg.byzantine.clear();
    for (const auto& s : o.byzantine) cfg.byzantine.push_back(zkfl::experiment::parse_byzantine(s));
  }
  if (given("late")) cfg.drop_late = o.drop_late.front();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable federated learning on an emulated ledger"};
  app.require_subcommand(1);

  Overrides setup_o;
  auto* setup = app.add_subcommand("setup", "Compile the training circuit, generate keys, deploy the ledger");
  add_experiment_flags(setup, setup_o);

  Overrides run_o;
  auto* run = app.add_subcommand("run", "Simulate updating cycles against existing setup artifacts");
  add_experiment_flags(run, run_o);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarise one or more run directories");
  report->add_option("dir", report_dir, "Run directory or a directory of runs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*setup) {
      const auto cfg = build_config(setup_o);
      const auto s = zkfl::experiment::cmd_setup(cfg);
      std::cout << "constraints: " << s.constraints << "\n"
                << "variables:   " << s.variables << "\n"
                << "public:      " << s.public_inputs << "\n"
                << "cs digest:   " << s.cs_digest << "\n"
                << "artifacts:   " << cfg.out.string() << "\n";
    } else if (*run) {
      const auto cfg = build_config(run_o);
      const auto r = zkfl::experiment::cmd_run(cfg);
      const auto& last = r.metrics.back();
      std::cout << "cycles:         " << r.metrics.size() << "\n"
                << "final accuracy: " << last.accuracy << "\n"
                << "reached 0.6 at: " << (r.cycles_to_target ? std::to_string(*r.cycles_to_target) : "never")
                << "\n"
                << "total cost:     " << last.cumulative_cost << "\n";
    } else if (*report) {
      zkfl::experiment::cmd_report(report_dir, std::cout);
    }
  } catch (const zkfl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
