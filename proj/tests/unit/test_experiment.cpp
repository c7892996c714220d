#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "zkfl/errors.hpp"
#include "zkfl/experiment.hpp"

using namespace zkfl;
using namespace zkfl::experiment;

namespace {

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("zkfl_exp_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentConfig tiny(const fs::path& out) {
  ExperimentConfig c;
  c.n_nodes = 2;
  c.batch_size = 2;
  c.cycles = 4;
  c.synthetic_per_node = 40;
  c.cycle_length_blocks = 10;
  c.checkpoint_every = 2;
  c.byzantine = {{1, node::ByzantineMode::kCorruptModel}};
  c.drop_late = 0.5;
  c.out = out;
  return c;
}

}  // namespace

TEST_CASE("byzantine spec parsing") {
  CHECK(parse_byzantine("2:replay_proof") == ByzantineSpec{2, node::ByzantineMode::kReplayProof});
  CHECK(parse_byzantine("1:corrupt_witness") == ByzantineSpec{1, node::ByzantineMode::kCorruptWitness});
  CHECK_THROWS_AS(parse_byzantine("2"), ConfigError);
  CHECK_THROWS_AS(parse_byzantine("x:corrupt_model"), ConfigError);
  CHECK_THROWS_AS(parse_byzantine("1:bogus"), ConfigError);
}

TEST_CASE("config JSON") {
  auto c = tiny("some/dir");
  c.alpha = 0.1;
  c.synthetic_skew = 1.5;
  const auto j = c.to_json();
  CHECK(ExperimentConfig::from_json(j).to_json() == j);
  CHECK(ExperimentConfig::from_json(nlohmann::json::object()).to_json() == ExperimentConfig{}.to_json());
  auto bad = j;
  bad["batchsize"] = 4;
  CHECK_THROWS_AS(ExperimentConfig::from_json(bad), ConfigError);

  const auto path = scratch("config.json");
  std::ofstream(path) << R"({"nodes": 3, "batch_size": 7})";
  const auto loaded = ExperimentConfig::load(path);
  CHECK(loaded.n_nodes == 3);
  CHECK(loaded.batch_size == 7);
  CHECK_THROWS_AS(ExperimentConfig::load(path.string() + ".missing"), ConfigError);
  fs::remove(path);
}

TEST_CASE("config validation") {
  auto c = tiny("x");
  CHECK_NOTHROW(c.validate());
  auto zero = c;
  zero.n_nodes = 0;
  CHECK_THROWS_AS(zero.validate(), ConfigError);
  auto batch = c;
  batch.batch_size = 0;
  CHECK_THROWS_AS(batch.validate(), ConfigError);
  auto late = c;
  late.drop_late = 1.5;
  CHECK_THROWS_AS(late.validate(), ConfigError);
  auto unit = c;
  unit.unit = 5;
  CHECK_THROWS_AS(unit.validate(), ConfigError);
}

TEST_CASE("prepare_data") {
  auto c = tiny("x");
  c.synthetic_per_node = 100;
  const auto d = prepare_data(c);
  CHECK(d.train.size() == 2);
  CHECK(d.classes == 6);
  CHECK(d.heldout.size() > 0);
  std::set<std::vector<double>> held;
  for (const auto& p : d.heldout) held.insert(p.features);
  for (const auto& s : d.train) {
    for (const auto& p : s) CHECK(held.count(p.features) == 0);
  }
  auto uci = c;
  uci.dataset = "/nonexistent/uci";
  CHECK_THROWS_AS(prepare_data(uci), ConfigError);
}

TEST_CASE("setup") {
  const auto dir = scratch("setup");
  auto c = tiny(dir);
  const auto s = cmd_setup(c);
  for (auto f : {"config.json", "cs.bin", "keys.bin", "layout.json", "ledger_init.json", "stats.json"}) {
    CHECK(fs::is_regular_file(dir / f));
  }
  std::map<std::string, std::string> first;
  for (const auto& e : fs::directory_iterator(dir)) first[e.path().filename()] = slurp(e.path());
  CHECK(cmd_setup(c).cs_digest == s.cs_digest);
  for (const auto& [name, bytes] : first) CHECK(slurp(dir / name) == bytes);

  auto bigger = c;
  bigger.batch_size = 40;
  bigger.out = scratch("setup_b40");
  CHECK(cmd_setup(bigger).constraints > s.constraints);
  fs::remove_all(bigger.out);
  fs::remove_all(dir);
}

TEST_CASE("run refuses mismatched artifacts") {
  const auto dir = scratch("mismatch");
  auto c = tiny(dir);
  cmd_setup(c);
  auto other = c;
  other.batch_size = 3;
  CHECK_THROWS_AS(cmd_run(other), ArtifactMismatch);
  fs::remove(dir / "keys.bin");
  CHECK_THROWS_AS(cmd_run(c), ArtifactMismatch);
  fs::remove_all(dir);
}

TEST_CASE("tiny runs are reproducible") {
  const auto a = scratch("run_a");
  const auto b = scratch("run_b");
  auto ca = tiny(a);
  auto cb = tiny(b);
  cmd_setup(ca);
  cmd_setup(cb);
  const auto ra = cmd_run(ca);
  const auto rb = cmd_run(cb);
  CHECK(ra.committed_digests == rb.committed_digests);
  CHECK(ra.final_model == rb.final_model);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(slurp(a / "ledger_events.jsonl") == slurp(b / "ledger_events.jsonl"));

  REQUIRE(ra.metrics.size() == 4);
  for (const auto& m : ra.metrics) CHECK(m.rejected >= 1);  // the byzantine account
  for (std::size_t k = 1; k < ra.metrics.size(); ++k) {
    CHECK(ra.metrics[k].cumulative_cost >= ra.metrics[k - 1].cumulative_cost);
  }

  std::istringstream csv(slurp(a / "metrics.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "cycle,accuracy,accepted,rejected,cumulative_cost");
  std::getline(csv, line);
  CHECK(line == format_metrics_row(ra.metrics[0]));
  CHECK(line.rfind("1,", 0) == 0);

  for (auto f : {"timings.csv", "node_0.jsonl", "node_1.jsonl", "node_2.jsonl", "run.json",
                 "checkpoints/cycle_0002.json", "checkpoints/cycle_0004.json", "checkpoints/final.json"}) {
    CHECK_MESSAGE(fs::is_regular_file(a / f), f);
  }
  const auto run = nlohmann::json::parse(slurp(a / "run.json"));
  CHECK(run.at("final_digest") == ra.committed_digests.back());
  const auto final_ckpt = nlohmann::json::parse(slurp(a / "checkpoints/final.json"));
  CHECK(nn::model_from_json(final_ckpt.at("model"), ca.fx) == ra.final_model);

  std::ostringstream table;
  const auto root = scratch("report");
  fs::create_directories(root);
  fs::rename(a, root / "n2_b2_a");
  fs::rename(b, root / "n2_b2_b");
  cmd_report(root, table);
  CHECK(table.str().find("monotonicity (nodes=2)") != std::string::npos);
  std::istringstream summary(slurp(root / "summary.csv"));
  std::getline(summary, line);
  CHECK(line.find("final_accuracy") != std::string::npos);
  std::size_t rows = 0;
  while (std::getline(summary, line)) ++rows;
  CHECK(rows == 2);
  std::istringstream acc(slurp(root / "accuracy_by_cycle.csv"));
  std::getline(acc, line);
  CHECK(line == "cycle,n2_b2_a,n2_b2_b");
  fs::remove_all(root);
}

TEST_CASE("report without runs") {
  const auto dir = scratch("empty");
  fs::create_directories(dir);
  std::ostringstream out;
  CHECK_THROWS_AS(cmd_report(dir, out), MissingMetrics);
  fs::remove_all(dir);
}
