#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "alteraser/model.hpp"
#include "alteraser/subproblem.hpp"

namespace alteraser {

/// Adaptive-moment optimizer settings with decoupled weight decay.
struct TrainConfig {
  double learning_rate = 1e-3;
  double weight_decay = 1e-4;  // decoupled, applied outside the moments
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  int batch_size_users = 256;
  int max_epochs = 500;
  int patience = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct TrainLogEntry {
  int epoch;  // 0 records the initial model
  double train_loss;
  double elapsed_seconds;
};

struct TrainLog {
  std::vector<TrainLogEntry> entries;
  int best_epoch = 0;
  double best_loss = 0.0;
  double total_seconds = 0.0;

  /// CSV columns: epoch,train_loss,elapsed_seconds
  void write_csv(const std::string& path) const;
};

/// Mini-batch training of the non-sampling loss: per batch of users, the
/// analytic gradients of the loss restricted to those users (their items and
/// h included) drive one AdamW step. Stops when the full-data loss has not
/// improved for `patience` epochs or max_epochs is reached; returns the
/// best-loss model. Deterministic for a fixed seed.
std::pair<ModelState, TrainLog> train(const InteractionDataset& ds, const TrainConfig& cfg,
                                      const ModelState& init);

/// A fixed number of AdamW steps on one block subproblem. Used as the
/// first-order inner solver of the unlearning ablation.
Eigen::VectorXd first_order_substep(const SubproblemSpec& spec, const Eigen::VectorXd& start,
                                    const TrainConfig& cfg, int steps);

}  // namespace alteraser
