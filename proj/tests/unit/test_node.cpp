#include <doctest.h>

#include <thread>

#include "../ledger_fixture.hpp"
#include "zkfl/errors.hpp"
#include "zkfl/node.hpp"

using namespace zkfl;
using namespace zkfl::node;
using testing::LedgerFixture;

namespace {
std::unique_ptr<LearningNode> make_node(const LedgerFixture& f, std::size_t account, ByzantineMode mode,
                                        std::size_t capacity = 16, QueueMode qmode = QueueMode::kBlock) {
  NodeConfig cfg;
  cfg.address = f.accounts.at(account);
  cfg.mode = mode;
  cfg.queue_capacity = capacity;
  cfg.queue_mode = qmode;
  cfg.seed = 3;
  return std::make_unique<LearningNode>(cfg, f.circuit, f.keys.proving_key, f.hp);
}
}  // namespace

TEST_CASE("batch queue is FIFO") {
  LedgerFixture f(1);
  Rng rng(1);
  BatchQueue q(4, QueueMode::kBalk);
  std::vector<nn::Batch> pushed;
  for (int i = 0; i < 4; ++i) {
    pushed.push_back(f.batch(rng));
    q.push(pushed.back());
  }
  CHECK(q.size() == 4);
  CHECK_THROWS_AS(q.push(f.batch(rng)), QueueFull);
  for (const auto& b : pushed) CHECK(q.try_pop() == b);
  CHECK_FALSE(q.try_pop().has_value());
}

TEST_CASE("blocking queue waits for space") {
  LedgerFixture f(1);
  Rng rng(2);
  BatchQueue q(1, QueueMode::kBlock);
  q.push(f.batch(rng));
  auto second = f.batch(rng);
  std::thread producer([&] { q.push(second); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  CHECK(q.size() == 1);
  REQUIRE(q.try_pop().has_value());
  producer.join();
  CHECK(q.try_pop() == second);
}

TEST_CASE("byzantine mode names") {
  for (auto m : {ByzantineMode::kHonest, ByzantineMode::kCorruptModel, ByzantineMode::kCorruptWitness,
                 ByzantineMode::kReplayProof}) {
    CHECK(parse_byzantine_mode(to_string(m)) == m);
  }
  CHECK_THROWS_AS(parse_byzantine_mode("evil"), ConfigError);
}

TEST_CASE("enqueue validates shape") {
  LedgerFixture f(1);
  auto node = make_node(f, 0, ByzantineMode::kHonest, 1, QueueMode::kBalk);
  Rng rng(3);
  CHECK_THROWS_AS(node->enqueue_batch(testing::random_batch(rng, 1, 3, 2, 1.0, f.cfg)), ConfigError);
  node->enqueue_batch(f.batch(rng));
  CHECK_THROWS_AS(node->enqueue_batch(f.batch(rng)), QueueFull);
}

TEST_CASE("honest node submits once per cycle") {
  LedgerFixture f(2);
  auto ledger = f.deploy();
  auto node = make_node(f, 0, ByzantineMode::kHonest);
  Rng rng(4);

  auto idle = node->run_cycle(ledger);
  CHECK_FALSE(idle.submitted);
  CHECK(idle.skipped == "no_batch");

  node->enqueue_batch(f.batch(rng));
  node->enqueue_batch(f.batch(rng));
  const auto r = node->run_cycle(ledger);
  CHECK(r.submitted);
  CHECK(r.accepted);
  CHECK(r.cycle == 0);
  CHECK(r.cost > 0);
  CHECK(node->last_seen_cycle() == 0);

  const auto again = node->run_cycle(ledger);
  CHECK_FALSE(again.submitted);
  CHECK(again.skipped == "already_submitted");
  CHECK(node->pending() == 1);

  ledger.advance_block(f.cycle_length);
  const auto next = node->run_cycle(ledger);
  CHECK(next.accepted);
  CHECK(next.cycle == 1);
  CHECK(ledger.read_global().first != nn::Model(2, 2));
}

TEST_CASE("prepare does not touch the ledger") {
  LedgerFixture f(2);
  auto ledger = f.deploy();
  auto a = make_node(f, 0, ByzantineMode::kHonest);
  auto b = make_node(f, 1, ByzantineMode::kHonest);
  Rng rng(5);
  a->enqueue_batch(f.batch(rng));
  b->enqueue_batch(f.batch(rng));
  const auto before = ledger.state_digest();
  std::variant<PreparedTx, CycleReport> pa, pb;
  std::thread ta([&] { pa = a->prepare(ledger); });
  std::thread tb([&] { pb = b->prepare(ledger); });
  ta.join();
  tb.join();
  CHECK(ledger.state_digest() == before);
  CHECK(a->submit(std::get<PreparedTx>(std::move(pa)), ledger).accepted);
  CHECK(b->submit(std::get<PreparedTx>(std::move(pb)), ledger).accepted);
}

TEST_CASE("byzantine nodes are rejected") {
  LedgerFixture f(3);
  Rng rng(6);

  SUBCASE("corrupt model") {
    auto ledger = f.deploy();
    auto node = make_node(f, 0, ByzantineMode::kCorruptModel);
    for (int c = 0; c < 5; ++c) {
      node->enqueue_batch(f.batch(rng));
      const auto r = node->run_cycle(ledger);
      CHECK(r.submitted);
      CHECK(r.rejection == ledger::RejectReason::kInvalidProof);
      ledger.advance_block(f.cycle_length);
    }
    CHECK(ledger.read_global().first == nn::Model(2, 2));
  }
  SUBCASE("corrupt witness") {
    auto ledger = f.deploy();
    auto node = make_node(f, 0, ByzantineMode::kCorruptWitness);
    for (int c = 0; c < 5; ++c) {
      node->enqueue_batch(f.batch(rng));
      const auto r = node->run_cycle(ledger);
      CHECK(r.submitted);
      CHECK(r.rejection == ledger::RejectReason::kInvalidProof);
      ledger.advance_block(f.cycle_length);
    }
    CHECK(ledger.read_global().first == nn::Model(2, 2));
  }
  SUBCASE("replayed proof against a moved model") {
    auto ledger = f.deploy();
    auto honest = make_node(f, 1, ByzantineMode::kHonest);
    auto node = make_node(f, 0, ByzantineMode::kReplayProof);
    for (int c = 0; c < 4; ++c) {
      node->enqueue_batch(f.batch(rng));
      honest->enqueue_batch(f.batch(rng));
      REQUIRE(honest->run_cycle(ledger).accepted);
      const auto r = node->run_cycle(ledger);
      if (c == 0) {
        CHECK(r.skipped == "nothing_to_replay");
      } else {
        CHECK(r.submitted);
        CHECK(r.rejection == ledger::RejectReason::kStaleModel);
      }
      ledger.advance_block(f.cycle_length);
    }
  }
}

TEST_CASE("cycle report JSON") {
  CycleReport r;
  r.cycle = 3;
  r.address = "0xab";
  r.submitted = true;
  r.rejection = ledger::RejectReason::kInvalidProof;
  const auto j = r.to_json();
  CHECK(j.at("cycle") == 3);
  CHECK(j.at("reason") == "InvalidProof");
  CHECK(j.contains("cost"));
}
