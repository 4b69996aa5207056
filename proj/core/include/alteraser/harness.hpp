#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "alteraser/dataset.hpp"
#include "alteraser/erase.hpp"
#include "alteraser/metrics.hpp"
#include "alteraser/model.hpp"
#include "alteraser/train.hpp"

namespace alteraser {

struct DatasetConfig {
  std::string format = "tsv";  // "movielens" or "tsv"
  std::string path;
};

struct SplitConfig {
  double train_fraction = 0.8;
  std::uint64_t seed = 1;
};

struct ModelConfig {
  int d = 64;
  double lambda = 1e-2;
  std::string weight_kind = "uniform";  // or "item_popularity"
  double w0 = 0.05;
  double w0_cap = 0.1;
  std::uint64_t init_seed = 7;
};

struct ForgetConfig {
  std::string scenario = "privacy";  // or "noise"
  int num_users = 64;
  std::uint64_t seed = 11;
};

struct EvalSettings {
  std::vector<int> ks = {10, 20, 50};
  double rbo_p = 0.9;
  std::string rbo_variant = "extrapolated";  // or "min"
};

/// Everything a run needs, loadable from a single JSON document. All seeds
/// are explicit; defaults are materialized back into the manifest.
struct RunConfig {
  DatasetConfig dataset;
  SplitConfig split;
  ModelConfig model;
  TrainConfig train;
  ForgetConfig forget;
  UnlearnConfig unlearn;
  EvalSettings eval;
  std::string output_dir = "out";
  int repeats = 1;

  RboVariant rbo_variant() const;
  void validate() const;
};

/// Accepts ah|ah_newton, hf|hf_newton, first-order|first_order.
InnerSolver parse_inner_solver(const std::string& name);

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
/// The fully materialized config as canonical JSON.
std::string run_config_json(const RunConfig& cfg);
/// FNV-1a over the canonical JSON.
std::uint64_t run_config_hash(const RunConfig& cfg);

/// Loads, splits and returns the configured dataset.
InteractionDataset load_and_split(const RunConfig& cfg);

/// Command entry points. Every command writes its artifacts plus a
/// manifest.json (config, hash, artifact list) under cfg.output_dir.
void cmd_train(const RunConfig& cfg);
void cmd_make_forget(const RunConfig& cfg);
void cmd_retrain(const RunConfig& cfg, const std::string& forget_file,
                 std::optional<std::uint64_t> seed_override);
void cmd_warmstart(const RunConfig& cfg, const std::string& forget_file,
                   const std::string& original_ckpt);
void cmd_unlearn(const RunConfig& cfg, const std::string& forget_file,
                 const std::string& original_ckpt);
std::vector<EvalReport> cmd_eval(const RunConfig& cfg,
                                 const std::vector<std::string>& checkpoints,
                                 const std::string& forget_file, const std::string& gold_ckpt);

/// The full method matrix: Original, Retrain, Retrain*, Warm-Start and
/// AltEraser with each inner solver, evaluated for consistency, accuracy
/// and efficiency. Returns the emitted reports (also written as CSV and
/// markdown). With repeats > 1, metric fields are averaged across repeats.
std::vector<EvalReport> cmd_bench(const RunConfig& cfg);

}  // namespace alteraser
