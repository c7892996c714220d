// Learning-rate grid search on the reference (floating-point) trainer.
// Trains the federated schedule of the configured experiment with plain
// averaging and reports held-out accuracy per candidate alpha.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "zkfl/errors.hpp"
#include "zkfl/experiment.hpp"
#include "zkfl/reference.hpp"

namespace {

using zkfl::nn::RealModel;

double real_accuracy(const RealModel<double>& model, const zkfl::data::Shard& data) {
  std::size_t hits = 0;
  for (const auto& d : data) {
    const auto y = zkfl::nn::reference_forward(model, std::span<const double>(d.features));
    std::size_t best = 0;
    for (std::size_t j = 1; j < y.size(); ++j) {
      if (y[j] > y[best]) best = j;
    }
    hits += best == d.label;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Grid search for the default learning rate"};
  std::string config;
  std::vector<double> grid{0.5, 0.1, 0.05, 0.01};
  std::size_t cycles = 300;
  std::vector<std::size_t> batch_sizes{10, 40};
  app.add_option("--config", config, "Experiment config (defaults otherwise)");
  app.add_option("--alphas", grid, "Candidate learning rates")->take_all();
  app.add_option("--batch-sizes", batch_sizes, "Batch sizes to average over")->take_all();
  app.add_option("--cycles", cycles, "Cycles per candidate");
  CLI11_PARSE(app, argc, argv);

  try {
    auto cfg = config.empty() ? zkfl::experiment::ExperimentConfig{} : zkfl::experiment::ExperimentConfig::load(config);
    const auto data = zkfl::experiment::prepare_data(cfg);
    const std::size_t n = zkfl::data::kUnitChannels;
    const std::size_t m = data.classes;

    double best_alpha = grid.front();
    double best_score = -1.0;
    std::printf("%-8s %-6s %-10s %-10s\n", "alpha", "batch", "mean_acc", "final_acc");
    for (double alpha : grid) {
      double score = 0.0;
      for (std::size_t b : batch_sizes) {
        std::vector<zkfl::data::BatchStream> streams;
        for (std::size_t i = 0; i < data.train.size(); ++i) {
          streams.emplace_back(data.train[i], b, zkfl::Rng::substream(cfg.seed, "batches", i).next_u64(), cfg.fx);
        }
        RealModel<double> global{n, m, std::vector<double>(n * m, 0.0), std::vector<double>(m, 0.0)};
        double sum_acc = 0.0;
        double acc = 0.0;
        for (std::size_t c = 0; c < cycles; ++c) {
          RealModel<double> next{n, m, std::vector<double>(n * m, 0.0), std::vector<double>(m, 0.0)};
          for (auto& s : streams) {
            const auto batch = zkfl::nn::to_real<double>(s.next(), cfg.fx);
            const auto local = zkfl::nn::reference_train_step(global, batch, alpha / static_cast<double>(b));
            for (std::size_t e = 0; e < next.weights.size(); ++e) next.weights[e] += local.weights[e];
            for (std::size_t j = 0; j < m; ++j) next.biases[j] += local.biases[j];
          }
          for (auto& w : next.weights) w /= static_cast<double>(streams.size());
          for (auto& v : next.biases) v /= static_cast<double>(streams.size());
          global = std::move(next);
          acc = real_accuracy(global, data.heldout);
          sum_acc += acc;
        }
        const double mean_acc = sum_acc / static_cast<double>(cycles);
        score += mean_acc;
        std::printf("%-8g %-6zu %-10.4f %-10.4f\n", alpha, b, mean_acc, acc);
      }
      if (score > best_score) {
        best_score = score;
        best_alpha = alpha;
      }
    }
    std::printf("selected alpha: %g\n", best_alpha);
  } catch (const zkfl::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
