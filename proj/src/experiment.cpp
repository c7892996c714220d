#include "zkfl/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "zkfl/errors.hpp"

namespace zkfl::experiment {

namespace {

using Clock = std::chrono::steady_clock;

void write_bytes(const fs::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

void write_text(const fs::path& path, std::string_view text) {
  write_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::vector<std::uint8_t> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ArtifactMismatch("missing setup artifact " + path.string() + " (run setup first)");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

std::vector<ledger::Address> honest_accounts(const ExperimentConfig& cfg) {
  std::vector<ledger::Address> out;
  for (std::size_t i = 0; i < cfg.n_nodes; ++i) out.push_back(ledger::account_address(i));
  return out;
}

std::vector<node::ByzantineMode> byzantine_modes(const ExperimentConfig& cfg) {
  std::vector<node::ByzantineMode> out;
  for (const auto& b : cfg.byzantine) out.insert(out.end(), b.count, b.mode);
  return out;
}

ledger::DeployConfig deploy_config(const ExperimentConfig& cfg, circuit::VerificationKey vk) {
  ledger::DeployConfig d;
  d.hp = cfg.hyperparams();
  d.fx = cfg.fx;
  d.verification_key = std::move(vk);
  d.cycle_length_blocks = cfg.cycle_length_blocks;
  d.accounts = honest_accounts(cfg);
  for (std::size_t j = 0; j < byzantine_modes(cfg).size(); ++j) {
    d.accounts.push_back(ledger::account_address(cfg.n_nodes + j));
  }
  d.cost = cfg.cost;
  return d;
}

}  // namespace

ByzantineSpec parse_byzantine(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) throw ConfigError("byzantine spec must look like <n>:<mode>");
  ByzantineSpec spec;
  const auto count = text.substr(0, colon);
  auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), spec.count);
  if (ec != std::errc() || ptr != count.data() + count.size()) {
    throw ConfigError("bad byzantine node count: " + std::string(count));
  }
  spec.mode = node::parse_byzantine_mode(text.substr(colon + 1));
  return spec;
}

void ExperimentConfig::validate() const {
  if (n_nodes == 0) throw ConfigError("nodes must be at least 1");
  if (batch_size == 0) throw ConfigError("batch size must be at least 1");
  if (cycles == 0) throw ConfigError("cycles must be at least 1");
  if (cycle_length_blocks == 0) throw ConfigError("cycle length must be at least 1 block");
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) throw ConfigError("heldout fraction must be in (0, 1)");
  if (!(drop_late >= 0.0 && drop_late <= 1.0)) throw ConfigError("drop-late probability must be in [0, 1]");
  if (unit >= data::kUnits) throw ConfigError("sensor unit must be in 0..4");
  fx.validate();
  circuit::backend_by_id(backend);
  if (dataset == "synthetic") {
    if (synthetic_per_node < 10) throw ConfigError("synthetic shards need at least 10 points");
  } else {
    if (n_nodes > data::kSubjects) throw ConfigError("the UCI layout has only 8 subject shards");
    if (!fs::is_directory(dataset)) throw ConfigError("dataset directory not found: " + dataset);
  }
  if (!merge_table.empty() && !fs::is_regular_file(merge_table)) {
    throw ConfigError("merge table not found: " + merge_table);
  }
  if (hyperparams().alpha_eff().is_zero()) throw ConfigError("alpha / batch size rounds to zero at this scale");
}

nn::Hyperparams ExperimentConfig::hyperparams() const {
  nn::Hyperparams hp;
  hp.alpha = fx::encode(alpha, fx);
  hp.batch_size = batch_size;
  hp.n_inputs = data::kUnitChannels;
  hp.n_classes = 6;
  return hp;
}

circuit::CircuitShape ExperimentConfig::shape() const {
  const auto hp = hyperparams();
  return {static_cast<std::uint32_t>(hp.batch_size), static_cast<std::uint32_t>(hp.n_inputs),
          static_cast<std::uint32_t>(hp.n_classes), fx};
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json byz = nlohmann::json::array();
  for (const auto& b : byzantine) byz.push_back(std::to_string(b.count) + ":" + std::string(node::to_string(b.mode)));
  return {{"nodes", n_nodes},
          {"batch_size", batch_size},
          {"cycles", cycles},
          {"seed", seed},
          {"scale_bits", fx.scale_bits},
          {"magnitude_bits", fx.magnitude_bits},
          {"alpha", alpha},
          {"cycle_length_blocks", cycle_length_blocks},
          {"dataset", dataset},
          {"unit", unit},
          {"merge_table", merge_table},
          {"synthetic_per_node", synthetic_per_node},
          {"synthetic_skew", synthetic_skew},
          {"synthetic_separation", synthetic_separation},
          {"synthetic_noise", synthetic_noise},
          {"heldout_fraction", heldout_fraction},
          {"byzantine", byz},
          {"drop_late", drop_late},
          {"backend", backend},
          {"checkpoint_every", checkpoint_every},
          {"cost", {{"base", cost.base}, {"per_byte", cost.per_byte}, {"per_constraint", cost.per_constraint}}},
          {"out", out.string()}};
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  ExperimentConfig c;
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "nodes") c.n_nodes = v.get<std::size_t>();
      else if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "cycles") c.cycles = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else if (key == "scale_bits") c.fx.scale_bits = v.get<unsigned>();
      else if (key == "magnitude_bits") c.fx.magnitude_bits = v.get<unsigned>();
      else if (key == "alpha") c.alpha = v.get<double>();
      else if (key == "cycle_length_blocks") c.cycle_length_blocks = v.get<std::uint64_t>();
      else if (key == "dataset") c.dataset = v.get<std::string>();
      else if (key == "unit") c.unit = v.get<std::size_t>();
      else if (key == "merge_table") c.merge_table = v.get<std::string>();
      else if (key == "synthetic_per_node") c.synthetic_per_node = v.get<std::size_t>();
      else if (key == "synthetic_skew") c.synthetic_skew = v.get<double>();
      else if (key == "synthetic_separation") c.synthetic_separation = v.get<double>();
      else if (key == "synthetic_noise") c.synthetic_noise = v.get<double>();
      else if (key == "heldout_fraction") c.heldout_fraction = v.get<double>();
      else if (key == "drop_late") c.drop_late = v.get<double>();
      else if (key == "backend") c.backend = v.get<std::string>();
      else if (key == "checkpoint_every") c.checkpoint_every = v.get<std::size_t>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "byzantine") {
        for (const auto& s : v) c.byzantine.push_back(parse_byzantine(s.get<std::string>()));
      } else if (key == "cost") {
        c.cost.base = v.value("base", c.cost.base);
        c.cost.per_byte = v.value("per_byte", c.cost.per_byte);
        c.cost.per_constraint = v.value("per_constraint", c.cost.per_constraint);
      } else {
        throw ConfigError("unknown config key: " + key);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

PreparedData prepare_data(const ExperimentConfig& cfg) {
  std::vector<data::Shard> raw;
  if (cfg.dataset == "synthetic") {
    data::SynthOptions opts;
    opts.skew = cfg.synthetic_skew;
    opts.separation = cfg.synthetic_separation;
    opts.noise = cfg.synthetic_noise;
    raw = data::synthesize(cfg.n_nodes, cfg.synthetic_per_node, cfg.seed, opts);
  } else {
    const auto table =
        cfg.merge_table.empty() ? data::MergeTable::default_table() : data::MergeTable::load(cfg.merge_table);
    const auto segments = data::load_uci(cfg.dataset);
    raw = data::shard_by_subject(segments, table, cfg.unit);
    raw.resize(cfg.n_nodes);
  }
  PreparedData out;
  std::vector<data::Shard> heldout_parts;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    auto split = data::stratified_split(raw[i], cfg.heldout_fraction, Rng::substream(cfg.seed, "heldout", i).next_u64());
    out.train.push_back(std::move(split.train));
    heldout_parts.push_back(std::move(split.heldout));
  }
  out.standardizer = data::Standardizer::fit(out.train);
  for (auto& s : out.train) s = out.standardizer.apply(s);
  for (const auto& part : heldout_parts) {
    for (const auto& d : out.standardizer.apply(part)) out.heldout.push_back(d);
  }
  for (std::size_t i = 0; i < out.train.size(); ++i) {
    if (out.train[i].empty()) throw EmptyDataError("node shard " + std::to_string(i) + " has no training data");
  }
  return out;
}

SetupSummary cmd_setup(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto data = prepare_data(cfg);
  const auto circuit = circuit::compile(cfg.shape());
  const auto& backend = circuit::backend_by_id(cfg.backend);
  const auto keys = backend.setup(circuit.shared_system());
  auto ledger = ledger::LearningContract::deploy(deploy_config(cfg, keys.verification_key));

  fs::create_directories(cfg.out);
  write_text(cfg.out / "config.json", json_text(cfg.to_json()));
  write_bytes(cfg.out / "cs.bin", circuit.system().serialize());
  write_bytes(cfg.out / "keys.bin", circuit::serialize_keypair(keys));
  write_text(cfg.out / "layout.json", json_text(circuit.system().manifest_json()));
  write_text(cfg.out / "ledger_init.json", json_text(ledger.snapshot()));

  nlohmann::json hist = nlohmann::json::array();
  nlohmann::json sizes = nlohmann::json::array();
  for (const auto& s : data.train) {
    hist.push_back(data::class_histogram(s, data.classes));
    sizes.push_back(s.size());
  }
  nlohmann::json stats = {{"dataset", cfg.dataset},
                          {"standardizer", data.standardizer.to_json()},
                          {"train_sizes", sizes},
                          {"train_class_histograms", hist},
                          {"heldout_size", data.heldout.size()},
                          {"heldout_class_histogram", data::class_histogram(data.heldout, data.classes)}};
  if (cfg.dataset != "synthetic") {
    stats["merge_table"] = (cfg.merge_table.empty() ? data::MergeTable::default_table()
                                                    : data::MergeTable::load(cfg.merge_table))
                               .to_json();
  }
  write_text(cfg.out / "stats.json", json_text(stats));

  return {circuit.system().num_constraints(), circuit.system().num_variables(), circuit.system().num_public(),
          to_hex(circuit.system().digest())};
}

std::string format_metrics_row(const CycleMetrics& m) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.6f,%zu,%zu,%llu", m.cycle, m.accuracy, m.accepted, m.rejected,
                static_cast<unsigned long long>(m.cumulative_cost));
  return buf;
}

RunSummary cmd_run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto hp = cfg.hyperparams();

  auto circuit = std::make_shared<const circuit::TrainingCircuit>(circuit::compile(cfg.shape()));
  const auto cs_file = circuit::ConstraintSystem::deserialize(read_bytes(cfg.out / "cs.bin"));
  const auto keys = circuit::deserialize_keypair(read_bytes(cfg.out / "keys.bin"));
  if (cs_file.digest() != circuit->system().digest() || keys.verification_key.cs_digest != cs_file.digest() ||
      keys.proving_key.cs_digest != cs_file.digest()) {
    throw ArtifactMismatch("setup artifacts were generated for a different circuit");
  }
  if (keys.verification_key.backend != cfg.backend) {
    throw ArtifactMismatch("setup keys belong to backend " + keys.verification_key.backend);
  }

  const auto data = prepare_data(cfg);
  const auto heldout = data::encode_set(data.heldout, cfg.fx);
  auto ledger = ledger::LearningContract::deploy(deploy_config(cfg, keys.verification_key));

  const auto modes = byzantine_modes(cfg);
  const std::size_t total_nodes = cfg.n_nodes + modes.size();
  std::vector<std::unique_ptr<node::LearningNode>> nodes;
  std::vector<data::BatchStream> streams;
  nodes.reserve(total_nodes);
  for (std::size_t i = 0; i < total_nodes; ++i) {
    const bool honest = i < cfg.n_nodes;
    node::NodeConfig nc;
    nc.address = ledger::account_address(i);
    nc.queue_capacity = 4;
    nc.mode = honest ? node::ByzantineMode::kHonest : modes[i - cfg.n_nodes];
    nc.seed = Rng::substream(cfg.seed, "node-seed", i).next_u64();
    nodes.push_back(std::make_unique<node::LearningNode>(nc, circuit, keys.proving_key, hp));
    const auto stream_seed = honest ? Rng::substream(cfg.seed, "batches", i).next_u64()
                                    : Rng::substream(cfg.seed, "byzantine-batches", i).next_u64();
    streams.emplace_back(data.train[i % cfg.n_nodes], cfg.batch_size, stream_seed, cfg.fx);
  }

  fs::create_directories(cfg.out / "checkpoints");
  std::ofstream metrics_csv(cfg.out / "metrics.csv", std::ios::trunc);
  std::ofstream timings_csv(cfg.out / "timings.csv", std::ios::trunc);
  metrics_csv << "cycle,accuracy,accepted,rejected,cumulative_cost\n";
  timings_csv << "cycle,mean_witness_ms,mean_prove_ms,submit_ms\n";
  std::vector<std::ofstream> node_logs;
  for (std::size_t i = 0; i < total_nodes; ++i) {
    node_logs.emplace_back(cfg.out / ("node_" + std::to_string(i) + ".jsonl"), std::ios::trunc);
  }

  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(total_nodes, std::thread::hardware_concurrency()));
  RunSummary summary;
  std::uint64_t cumulative_cost = 0;
  const auto write_checkpoint = [&](const std::string& name) {
    const auto [model, cycle] = ledger.read_global();
    write_text(cfg.out / "checkpoints" / name,
               json_text({{"cycle", cycle},
                          {"committed_digest", ledger.committed_digest()},
                          {"model", nn::model_to_json(model, cfg.fx)}}));
  };

  for (std::size_t cycle = 0; cycle < cfg.cycles; ++cycle) {
    for (std::size_t i = 0; i < total_nodes; ++i) nodes[i]->enqueue_batch(streams[i].next());

    std::vector<std::variant<node::PreparedTx, node::CycleReport>> prepared(total_nodes);
    std::vector<std::exception_ptr> errors(total_nodes);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
      for (std::size_t i = next++; i < total_nodes; i = next++) {
        try {
          prepared[i] = nodes[i]->prepare(ledger);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }

    Rng late_rng = Rng::substream(cfg.seed, "drop-late", cycle);
    CycleMetrics m;
    m.cycle = cycle + 1;
    double witness_ms = 0.0;
    double prove_ms = 0.0;
    std::size_t timed = 0;
    std::vector<std::pair<std::size_t, node::PreparedTx>> late;
    std::vector<node::CycleReport> reports(total_nodes);
    const auto t_submit = Clock::now();
    for (std::size_t i = 0; i < total_nodes; ++i) {
      const bool is_late = i < cfg.n_nodes && cfg.drop_late > 0.0 && late_rng.bernoulli(cfg.drop_late);
      if (auto* r = std::get_if<node::CycleReport>(&prepared[i])) {
        reports[i] = *r;
        continue;
      }
      auto& p = std::get<node::PreparedTx>(prepared[i]);
      witness_ms += p.witness_ms;
      prove_ms += p.prove_ms;
      ++timed;
      if (is_late) {
        late.emplace_back(i, std::move(p));
        continue;
      }
      reports[i] = nodes[i]->submit(std::move(p), ledger);
    }
    ledger.advance_block(ledger.blocks_until_boundary());
    for (auto& [i, p] : late) reports[i] = nodes[i]->submit(std::move(p), ledger);
    const double submit_ms = std::chrono::duration<double, std::milli>(Clock::now() - t_submit).count();

    for (std::size_t i = 0; i < total_nodes; ++i) {
      const auto& r = reports[i];
      if (r.submitted) {
        (r.accepted ? m.accepted : m.rejected) += 1;
        cumulative_cost += r.cost;
      }
      node_logs[i] << r.to_json().dump() << "\n";
    }
    const auto global = ledger.read_global().first;
    m.accuracy = nn::accuracy(global, heldout, cfg.fx);
    m.cumulative_cost = cumulative_cost;
    m.mean_witness_ms = timed ? witness_ms / static_cast<double>(timed) : 0.0;
    m.mean_prove_ms = timed ? prove_ms / static_cast<double>(timed) : 0.0;
    metrics_csv << format_metrics_row(m) << "\n";
    timings_csv << m.cycle << "," << std::fixed << std::setprecision(3) << m.mean_witness_ms << ","
                << m.mean_prove_ms << "," << submit_ms << "\n";
    timings_csv.unsetf(std::ios::fixed);
    summary.metrics.push_back(m);
    summary.committed_digests.push_back(ledger.committed_digest());
    if (!summary.cycles_to_target && m.accuracy >= kTargetAccuracy) summary.cycles_to_target = m.cycle;
    if (cfg.checkpoint_every > 0 && m.cycle % cfg.checkpoint_every == 0) {
      char name[32];
      std::snprintf(name, sizeof name, "cycle_%04zu.json", m.cycle);
      write_checkpoint(name);
    }
  }
  write_checkpoint("final.json");
  summary.final_model = ledger.read_global().first;

  std::ofstream events(cfg.out / "ledger_events.jsonl", std::ios::trunc);
  for (const auto& e : ledger.events()) events << e.dump() << "\n";

  std::size_t accepted = 0;
  std::size_t rejected = 0;
  for (const auto& m : summary.metrics) {
    accepted += m.accepted;
    rejected += m.rejected;
  }
  const std::size_t txs = accepted + rejected;
  nlohmann::json run = {
      {"config", cfg.to_json()},
      {"constraints", circuit->system().num_constraints()},
      {"cycles_run", summary.metrics.size()},
      {"final_accuracy", summary.metrics.empty() ? 0.0 : summary.metrics.back().accuracy},
      {"cycles_to_target", summary.cycles_to_target ? nlohmann::json(*summary.cycles_to_target) : nlohmann::json()},
      {"target_accuracy", kTargetAccuracy},
      {"accepted", accepted},
      {"rejected", rejected},
      {"total_cost", cumulative_cost},
      {"mean_cost_per_tx", txs ? static_cast<double>(cumulative_cost) / static_cast<double>(txs) : 0.0},
      {"final_digest", ledger.committed_digest()},
      {"state_digest", ledger.state_digest()}};
  write_text(cfg.out / "run.json", json_text(run));
  return summary;
}

namespace {

struct RunRecord {
  std::string label;
  std::vector<std::pair<std::size_t, double>> accuracy;
  nlohmann::json info;
};

RunRecord read_run(const fs::path& dir, std::string label) {
  RunRecord r{std::move(label), {}, nlohmann::json::object()};
  std::ifstream in(dir / "metrics.csv");
  std::string line;
  std::getline(in, line);
  if (line.rfind("cycle,accuracy", 0) != 0) throw MissingMetrics("malformed metrics.csv in " + dir.string());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::size_t cycle = 0;
    double acc = 0.0;
    if (std::sscanf(line.c_str(), "%zu,%lf", &cycle, &acc) != 2) {
      throw MissingMetrics("malformed metrics row in " + dir.string());
    }
    r.accuracy.emplace_back(cycle, acc);
  }
  if (std::ifstream info(dir / "run.json"); info) r.info = nlohmann::json::parse(info, nullptr, false);
  if (r.info.is_discarded()) r.info = nlohmann::json::object();
  return r;
}

std::size_t config_value(const RunRecord& r, const char* key) {
  if (r.info.contains("config") && r.info["config"].contains(key)) return r.info["config"][key].get<std::size_t>();
  return 0;
}

std::optional<std::size_t> reach_cycle(const RunRecord& r) {
  for (const auto& [cycle, acc] : r.accuracy) {
    if (acc >= kTargetAccuracy) return cycle;
  }
  return std::nullopt;
}

}  // namespace

void cmd_report(const fs::path& dir, std::ostream& out) {
  std::vector<RunRecord> runs;
  if (fs::is_regular_file(dir / "metrics.csv")) {
    runs.push_back(read_run(dir, dir.filename().string()));
  } else if (fs::is_directory(dir)) {
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && fs::is_regular_file(e.path() / "metrics.csv")) subdirs.push_back(e.path());
    }
    std::sort(subdirs.begin(), subdirs.end());
    for (const auto& s : subdirs) runs.push_back(read_run(s, s.filename().string()));
  }
  if (runs.empty()) throw MissingMetrics("no metrics.csv found under " + dir.string());
  std::stable_sort(runs.begin(), runs.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::pair(config_value(a, "nodes"), config_value(a, "batch_size")) <
           std::pair(config_value(b, "nodes"), config_value(b, "batch_size"));
  });

  std::size_t max_cycle = 0;
  for (const auto& r : runs) {
    for (const auto& [c, a] : r.accuracy) max_cycle = std::max(max_cycle, c);
  }
  std::ostringstream acc;
  acc << "cycle";
  for (const auto& r : runs) acc << "," << r.label;
  acc << "\n";
  std::vector<std::map<std::size_t, double>> lookup;
  for (const auto& r : runs) lookup.emplace_back(r.accuracy.begin(), r.accuracy.end());
  for (std::size_t c = 1; c <= max_cycle; ++c) {
    acc << c;
    for (const auto& l : lookup) {
      acc << ",";
      if (auto it = l.find(c); it != l.end()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", it->second);
        acc << buf;
      }
    }
    acc << "\n";
  }

  std::ostringstream sum;
  sum << "run,nodes,batch_size,cycles,final_accuracy,cycles_to_0.6,mean_cost_per_tx,constraints\n";
  out << std::left << std::setw(24) << "run" << std::setw(7) << "nodes" << std::setw(7) << "batch" << std::setw(8)
      << "cycles" << std::setw(10) << "final_acc" << std::setw(10) << "to_0.6" << std::setw(14) << "cost/tx"
      << "constraints\n";
  for (const auto& r : runs) {
    const auto reach = reach_cycle(r);
    const double final_acc = r.accuracy.empty() ? 0.0 : r.accuracy.back().second;
    const double cost = r.info.value("mean_cost_per_tx", 0.0);
    const std::size_t constraints = r.info.value("constraints", std::size_t{0});
    char line[256];
    std::snprintf(line, sizeof line, "%s,%zu,%zu,%zu,%.6f,%s,%.1f,%zu\n", r.label.c_str(), config_value(r, "nodes"),
                  config_value(r, "batch_size"), r.accuracy.size(), final_acc,
                  reach ? std::to_string(*reach).c_str() : "", cost, constraints);
    sum << line;
    out << std::left << std::setw(24) << r.label << std::setw(7) << config_value(r, "nodes") << std::setw(7)
        << config_value(r, "batch_size") << std::setw(8) << r.accuracy.size() << std::setw(10) << std::fixed
        << std::setprecision(4) << final_acc << std::setw(10) << (reach ? std::to_string(*reach) : "never")
        << std::setw(14) << std::setprecision(1) << cost << constraints << "\n";
  }

  // Within each participant count, larger batches should reach the target sooner.
  std::map<std::size_t, std::vector<const RunRecord*>> by_nodes;
  for (const auto& r : runs) by_nodes[config_value(r, "nodes")].push_back(&r);
  for (const auto& [n, group] : by_nodes) {
    if (group.size() < 2) continue;
    bool strict = true;
    bool weak = true;
    for (std::size_t k = 1; k < group.size(); ++k) {
      const auto a = reach_cycle(*group[k - 1]).value_or(SIZE_MAX);
      const auto b = reach_cycle(*group[k]).value_or(SIZE_MAX);
      strict = strict && b < a;
      weak = weak && b <= a;
    }
    out << "monotonicity (nodes=" << n << "): " << (strict ? "strict" : weak ? "non-strict" : "violated") << "\n";
  }

  write_text(dir / "accuracy_by_cycle.csv", acc.str());
  write_text(dir / "summary.csv", sum.str());
}

}  // namespace zkfl::experiment
