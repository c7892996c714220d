// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion.
//
//   acceptance            run all criteria
//   acceptance 2 7        run a subset
//
// ZKFL_UCI_DIR selects the UCI activity data for criterion 7; without it the
// synthetic substitute and its stricter thresholds are used.

#include <gmpxx.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "../ledger_fixture.hpp"
#include "zkfl/errors.hpp"
#include "zkfl/experiment.hpp"
#include "zkfl/reference.hpp"

using namespace zkfl;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr int kEquivalenceInstances = 100;
constexpr int kTamperings = 100;
constexpr int kGradientInstances = 50;
constexpr double kFdStep = 1e-5;
constexpr double kFdTolerance = 1e-5;
constexpr int kFidelitySteps = 50;
constexpr double kFidelityTolerance = 1e-2;
constexpr int kSchedules = 1000;
constexpr double kUciAccuracy = 0.70;
constexpr double kSyntheticAccuracy = 0.90;

const fx::FxConfig cfg{};

struct Outcome {
  bool pass = false;
  std::string detail;
};

fs::path work_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / "zkfl_acceptance" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome circuit_equivalence() {
  const auto hp = testing::make_hp(0.1, 10, 9, 6, cfg);
  const auto circuit = circuit::compile(hp, cfg);
  Rng rng(101);
  int equal = 0;
  for (int t = 0; t < kEquivalenceInstances; ++t) {
    auto h = hp;
    h.alpha = fx::encode(rng.uniform(0.01, 0.5), cfg);
    const auto model = testing::random_model(rng, 9, 6, 2.0, cfg);
    const auto batch = testing::random_batch(rng, 10, 9, 6, 2.0, cfg);
    const auto result = circuit.compute_witness(model, h.alpha_eff(), batch);
    equal += circuit.extract_updated(result.witness) == nn::train_step(model, batch, h, cfg);
  }
  return {equal == kEquivalenceInstances, fmt("%d/%d bit-exact at n=9 m=6 B=10", equal, kEquivalenceInstances)};
}

Outcome soundness() {
  const auto hp = testing::make_hp(0.1, 10, 9, 6, cfg);
  const auto circuit = circuit::compile(hp, cfg);
  const auto& cs = circuit.system();
  const auto& field = cs.field();
  Rng rng(202);
  const auto model = testing::random_model(rng, 9, 6, 2.0, cfg);
  const auto batch = testing::random_batch(rng, 10, 9, 6, 2.0, cfg);
  const auto result = circuit.compute_witness(model, hp.alpha_eff(), batch);
  const auto pub = circuit.public_inputs(model, hp.alpha_eff(), result.updated);

  std::string detail;
  int total_accepted = 0;
  bool honest_ok = true;
  for (auto id : circuit::backend_ids()) {
    const auto& backend = circuit::backend_by_id(id);
    const auto keys = backend.setup(circuit.shared_system());
    const auto proof = backend.prove(cs, result.witness, keys.proving_key);
    honest_ok = honest_ok && backend.verify(keys.verification_key, pub, proof);
    int wire_accepted = 0;
    for (int t = 0; t < kTamperings; ++t) {
      auto w = result.witness;
      const auto idx = 1 + rng.below(cs.num_variables() - 1);
      w.values[idx] = field.add(w.values[idx], field.from_u64(1 + rng.below(1u << 20)));
      // Tampering a public wire changes what the proof claims; verify against
      // the honest public inputs either way.
      wire_accepted += backend.verify(keys.verification_key, pub, backend.prove(cs, w, keys.proving_key));
    }
    int pub_accepted = 0;
    for (int t = 0; t < kTamperings; ++t) {
      auto claimed = pub;
      const auto idx = rng.below(claimed.size());
      claimed[idx] = field.add(claimed[idx], field.from_u64(1 + rng.below(1u << 20)));
      pub_accepted += backend.verify(keys.verification_key, claimed, proof);
    }
    total_accepted += wire_accepted + pub_accepted;
    detail += fmt("%s: %d/%d wire, %d/%d public accepted; ", std::string(id).c_str(), wire_accepted, kTamperings,
                  pub_accepted, kTamperings);
  }
  detail += honest_ok ? "honest proofs accepted" : "honest proof REJECTED";
  return {honest_ok && total_accepted == 0, detail};
}

Outcome gradient_check() {
  using nn::RealBatch;
  using nn::RealModel;
  Rng rng(303);
  double worst = 0.0;
  for (int trial = 0; trial < kGradientInstances; ++trial) {
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
    const auto next = nn::reference_train_step(model, batch, alpha_eff);
    auto check = [&](double& param, double updated) {
      const double saved = param;
      param = saved + kFdStep;
      const double up = nn::reference_objective(model, batch);
      param = saved - kFdStep;
      const double down = nn::reference_objective(model, batch);
      param = saved;
      const double fd = (up - down) / (2 * kFdStep);
      const double analytic = (saved - updated) / alpha_eff;
      worst = std::max(worst, std::fabs(analytic - fd) / std::max({std::fabs(analytic), std::fabs(fd), 1e-3}));
    };
    for (std::size_t e = 0; e < n * m; ++e) check(model.weights[e], next.weights[e]);
    for (std::size_t j = 0; j < m; ++j) check(model.biases[j], next.biases[j]);
  }
  return {worst < kFdTolerance, fmt("worst relative error %.3g over %d instances (h=%g)", worst, kGradientInstances,
                                    kFdStep)};
}

Outcome fixed_point_fidelity() {
  experiment::ExperimentConfig c;
  c.batch_size = 40;
  const auto data = experiment::prepare_data(c);
  const auto hp = c.hyperparams();
  std::vector<nn::Batch> batches;
  data::BatchStream stream(data.train[0], hp.batch_size, 404, cfg);
  for (int s = 0; s < kFidelitySteps; ++s) batches.push_back(stream.next());

  // exact-rational oracle first
  const mpq_class alpha_eff = nn::to_real<mpq_class>(hp.alpha_eff(), cfg);
  auto exact = nn::to_real<mpq_class>(nn::Model(9, 6), cfg);
  for (const auto& b : batches) {
    exact = nn::reference_train_step(exact, nn::to_real<mpq_class>(b, cfg), alpha_eff);
    for (auto& w : exact.weights) w.canonicalize();
    for (auto& v : exact.biases) v.canonicalize();
  }

  nn::Model fixed(9, 6);
  for (const auto& b : batches) fixed = nn::train_step(fixed, b, hp, cfg);
  const auto fixed_real = nn::to_real<mpq_class>(fixed, cfg);
  mpq_class worst = 0;
  for (std::size_t e = 0; e < exact.weights.size(); ++e) worst = std::max(worst, mpq_class(abs(fixed_real.weights[e] - exact.weights[e])));
  for (std::size_t j = 0; j < exact.biases.size(); ++j) worst = std::max(worst, mpq_class(abs(fixed_real.biases[j] - exact.biases[j])));
  return {worst < kFidelityTolerance,
          fmt("max |fixed - exact| = %.3g after %d steps (scale_bits=%u, B=40)", worst.get_d(), kFidelitySteps,
              cfg.scale_bits)};
}

Outcome fairness_liveness() {
  testing::LedgerFixture f(4);
  Rng rng(505);
  std::size_t violations = 0;
  std::size_t crossings = 0;
  std::size_t empty_cycles = 0;
  std::size_t accepts = 0;
  for (int schedule = 0; schedule < kSchedules; ++schedule) {
    auto ledger = f.deploy();
    std::map<std::pair<ledger::Address, std::uint64_t>, int> accepted;
    std::optional<ledger::UpdateTx> last;
    const int steps = 5 + static_cast<int>(rng.below(20));
    for (int step = 0; step < steps; ++step) {
      const auto action = rng.below(10);
      if (action < 3) {
        const auto k = 1 + rng.below(2 * f.cycle_length);
        const auto height = ledger.state().block_height;
        const auto expected = (height + k) / f.cycle_length - height / f.cycle_length;
        const auto before = ledger.state().cycle_index;
        if (expected > 0 && ledger.state().update_count_this_cycle == 0) ++empty_cycles;
        ledger.advance_block(k);
        crossings += expected;
        if (ledger.state().cycle_index != before + expected) ++violations;
      } else {
        ledger::UpdateTx tx;
        if (action == 3 && last) {
          tx = *last;  // resubmission
        } else {
          const auto sender = action == 4 ? ledger::account_address(99) : f.accounts[rng.below(4)];
          tx = f.honest_tx(ledger, sender, f.batch(rng));
          if (action == 5) tx.local_model.set_bias(0, fx::fx_add(tx.local_model.bias(0), fx::encode(1.0, cfg), cfg));
        }
        const auto cycle = ledger.state().cycle_index;
        if (ledger.submit_update(tx).accepted()) {
          ++accepts;
          if (++accepted[{tx.sender, cycle}] > 1) ++violations;
        }
        last = tx;
      }
    }
  }
  return {violations == 0, fmt("%d schedules, %zu accepts, %zu boundary crossings (%zu from empty cycles), "
                               "%zu violations",
                               kSchedules, accepts, crossings, empty_cycles, violations)};
}

experiment::ExperimentConfig small_run(const fs::path& out) {
  experiment::ExperimentConfig c;
  c.n_nodes = 8;
  c.batch_size = 10;
  c.cycles = 40;
  c.out = out;
  return c;
}

Outcome byzantine_immunity() {
  auto clean = small_run(work_dir("byz_clean"));
  auto dirty = small_run(work_dir("byz_dirty"));
  dirty.byzantine = {{1, node::ByzantineMode::kCorruptModel}, {1, node::ByzantineMode::kReplayProof}};
  experiment::cmd_setup(clean);
  experiment::cmd_setup(dirty);
  const auto a = experiment::cmd_run(clean);
  const auto b = experiment::cmd_run(dirty);
  std::size_t rejected = 0;
  std::size_t accepted_a = 0;
  std::size_t accepted_b = 0;
  for (const auto& m : b.metrics) {
    rejected += m.rejected;
    accepted_b += m.accepted;
  }
  for (const auto& m : a.metrics) accepted_a += m.accepted;
  const bool same = a.committed_digests == b.committed_digests;
  return {same && accepted_a == accepted_b,
          fmt("%zu cycles, committed sequences %s, %zu byzantine rejections, accepted %zu vs %zu",
              a.committed_digests.size(), same ? "identical" : "DIFFER", rejected, accepted_a, accepted_b)};
}

Outcome learning_performance() {
  const char* uci = std::getenv("ZKFL_UCI_DIR");
  const bool use_uci = uci && fs::is_directory(uci);
  auto run = [&](std::size_t batch) {
    experiment::ExperimentConfig c;
    c.n_nodes = 8;
    c.batch_size = batch;
    c.cycles = 300;
    if (use_uci) c.dataset = uci;
    c.out = work_dir("learn_b" + std::to_string(batch));
    experiment::cmd_setup(c);
    return experiment::cmd_run(c);
  };
  const auto b40 = run(40);
  const double final40 = b40.metrics.back().accuracy;
  if (use_uci) {
    return {final40 >= kUciAccuracy, fmt("UCI data: final held-out accuracy %.4f (need >= %.2f)", final40, kUciAccuracy)};
  }
  const auto b10 = run(10);
  const auto reach = [](const experiment::RunSummary& r) {
    return r.cycles_to_target ? std::to_string(*r.cycles_to_target) : std::string("never");
  };
  const bool accurate = final40 >= kSyntheticAccuracy;
  const bool ordered = b40.cycles_to_target && (!b10.cycles_to_target || *b40.cycles_to_target < *b10.cycles_to_target);
  return {accurate && ordered,
          fmt("synthetic data: B=40 final accuracy %.4f (need >= %.2f, %s); cycles to %.1f: B=40 %s, B=10 %s "
              "(need B=40 strictly fewer, %s)",
              final40, kSyntheticAccuracy, accurate ? "met" : "NOT met", experiment::kTargetAccuracy,
              reach(b40).c_str(), reach(b10).c_str(), ordered ? "met" : "NOT met")};
}

Outcome cost_scaling() {
  std::map<std::size_t, std::size_t> count;
  for (std::size_t B : {1, 2, 4, 8}) count[B] = circuit::compile(testing::make_hp(0.1, B, 9, 6, cfg), cfg).system().num_constraints();
  const auto c1 = static_cast<long long>(count[2]) - static_cast<long long>(count[1]);
  const auto c0 = static_cast<long long>(count[1]) - c1;
  long long residual = 0;
  for (const auto& [B, c] : count) residual += std::llabs(static_cast<long long>(c) - (c0 + c1 * static_cast<long long>(B)));
  return {residual == 0, fmt("count(B) = %lld + %lld*B at n=9 m=6; counts %zu/%zu/%zu/%zu; residual %lld", c0, c1,
                             count[1], count[2], count[4], count[8], residual)};
}

Outcome replay_determinism() {
  auto c = small_run(work_dir("replay"));
  c.cycles = 30;
  c.byzantine = {{1, node::ByzantineMode::kCorruptWitness}};
  c.drop_late = 0.25;
  experiment::cmd_setup(c);
  experiment::cmd_run(c);
  const auto first = slurp(c.out / "metrics.csv");
  experiment::cmd_run(c);
  const auto second = slurp(c.out / "metrics.csv");
  return {!first.empty() && first == second,
          fmt("metrics.csv %zu bytes, %s", first.size(), first == second ? "byte-identical" : "DIFFERENT")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "circuit/native equivalence", circuit_equivalence},
      {2, "soundness", soundness},
      {3, "gradient check", gradient_check},
      {4, "fixed-point fidelity", fixed_point_fidelity},
      {5, "aggregator fairness/liveness", fairness_liveness},
      {6, "byzantine immunity", byzantine_immunity},
      {7, "learning performance", learning_performance},
      {8, "cost scaling shape", cost_scaling},
      {9, "replay determinism", replay_determinism},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d (%s): %s  %s  [%.1fs]\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
