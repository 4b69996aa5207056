#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "alteraser/dataset.hpp"
#include "alteraser/model.hpp"
#include "alteraser/subproblem.hpp"
#include "alteraser/train.hpp"

namespace alteraser {

enum class InnerSolver { ah_newton, hf_newton, first_order };

struct UnlearnConfig {
  InnerSolver inner_solver = InnerSolver::ah_newton;
  int max_full_passes = 3;
  double rel_loss_tol = 1e-4;
  HFConfig hf;
  TrainConfig first_order;      // step hyperparameters for the 1st-order ablation
  int first_order_steps = 100;  // fixed AdamW steps per block in that ablation
  int parallel_workers = 1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct UnlearnLogEntry {
  int pass;           // 0 is the targeted pass, then 1..k full passes
  std::string phase;  // "targeted" or "full"
  int blocks_solved;
  double loss_after;  // full training loss on the remaining data
  double elapsed_seconds;
};

struct UnlearnLog {
  std::vector<UnlearnLogEntry> entries;
  double total_seconds = 0.0;

  /// CSV columns: pass,phase,blocks_solved,loss_after,elapsed_seconds
  void write_csv(const std::string& path) const;
};

/// True when the remaining-loss history shows relative improvement below
/// rel_loss_tol between the last two entries, or when the number of full
/// passes recorded (entries after the first) reached max_full_passes.
bool stopping_check(const std::vector<double>& loss_history, const UnlearnConfig& cfg);

/// One alternating pass: every listed user block is solved against the
/// current item side (shared Gram built once), rows written in place; then
/// the item Gram is rebuilt from the updated users and every listed item
/// block is solved. Blocks within a phase are independent and may run on
/// cfg.parallel_workers threads; results do not depend on the worker count.
void one_erase_pass(const std::vector<int>& users, const std::vector<int>& items,
                    const InteractionDataset& remaining, ModelState& model,
                    const UnlearnConfig& cfg);

/// Alternating unlearning: warm-starts from `original`, runs one targeted
/// pass over the users/items occurring in the forget set, then full passes
/// over the users/items of the remaining data until stopping_check fires.
/// The prediction layer h is never touched.
std::pair<ModelState, UnlearnLog> alt_erase(const InteractionDataset& ds_all,
                                            const ForgetRequest& req,
                                            const ModelState& original,
                                            const UnlearnConfig& cfg);

}  // namespace alteraser
