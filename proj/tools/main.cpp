// alteraser: train a non-sampling matrix-factorization recommender, generate
// and apply forget requests, unlearn with alternating second-order block
// solves, and benchmark against retraining.

#include <CLI11.hpp>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "alteraser/errors.hpp"
#include "alteraser/harness.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> solver;
  std::optional<int> repeats;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", flags.out_dir, "Output directory (overrides config)");
  cmd->add_option("--seed", flags.seed,
                  "Base seed override: reseeds split/init/train/forget/unlearn "
                  "from this value (for `retrain`, overrides the training seed "
                  "to produce the Retrain* variant)");
  cmd->add_option("--workers", flags.workers, "Parallel workers for unlearning passes");
  cmd->add_option("--solver", flags.solver, "Inner solver: ah|hf|first-order");
  cmd->add_option("--repeats", flags.repeats, "Benchmark repetitions (bench only)");
}

alteraser::RunConfig resolve_config(const CommonFlags& flags, bool apply_base_seed) {
  alteraser::RunConfig cfg = alteraser::load_run_config(flags.config_path);
  if (!flags.out_dir.empty()) cfg.output_dir = flags.out_dir;
  if (flags.workers) cfg.unlearn.parallel_workers = *flags.workers;
  if (flags.solver) cfg.unlearn.inner_solver = alteraser::parse_inner_solver(*flags.solver);
  if (flags.repeats) cfg.repeats = *flags.repeats;
  if (apply_base_seed && flags.seed) {
    cfg.split.seed = *flags.seed;
    cfg.model.init_seed = *flags.seed + 1;
    cfg.train.seed = *flags.seed + 2;
    cfg.forget.seed = *flags.seed + 3;
    cfg.unlearn.seed = *flags.seed + 4;
  }
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-factorization recommender with fast unlearning"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string forget_file, original_ckpt, gold_ckpt;
  std::vector<std::string> checkpoints;

  auto* train_cmd = app.add_subcommand("train", "Train the original model");
  add_common(train_cmd, flags);

  auto* forget_cmd = app.add_subcommand("make-forget", "Generate a forget request file");
  add_common(forget_cmd, flags);

  auto* retrain_cmd = app.add_subcommand("retrain", "Retrain from scratch on remaining data");
  add_common(retrain_cmd, flags);
  retrain_cmd->add_option("--forget", forget_file, "Forget request file")
      ->required()
      ->check(CLI::ExistingFile);

  auto* warm_cmd = app.add_subcommand("warmstart", "Fine-tune from the original checkpoint");
  add_common(warm_cmd, flags);
  warm_cmd->add_option("--forget", forget_file, "Forget request file")
      ->required()
      ->check(CLI::ExistingFile);
  warm_cmd->add_option("--init", original_ckpt, "Original model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  auto* unlearn_cmd = app.add_subcommand("unlearn", "AltEraser unlearning");
  add_common(unlearn_cmd, flags);
  unlearn_cmd->add_option("--forget", forget_file, "Forget request file")
      ->required()
      ->check(CLI::ExistingFile);
  unlearn_cmd->add_option("--init", original_ckpt, "Original model checkpoint")
      ->required()
      ->check(CLI::ExistingFile);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate checkpoints");
  add_common(eval_cmd, flags);
  eval_cmd->add_option("--forget", forget_file, "Forget request file")->check(CLI::ExistingFile);
  eval_cmd->add_option("--gold", gold_ckpt, "Retrained (gold) checkpoint for RBO")
      ->check(CLI::ExistingFile);
  eval_cmd->add_option("checkpoints", checkpoints, "Model checkpoints to evaluate")
      ->required();

  auto* bench_cmd = app.add_subcommand("bench", "Run the full method matrix");
  add_common(bench_cmd, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  const std::string stage = app.get_subcommands().front()->get_name();
  try {
    if (train_cmd->parsed()) {
      alteraser::cmd_train(resolve_config(flags, true));
    } else if (forget_cmd->parsed()) {
      alteraser::cmd_make_forget(resolve_config(flags, true));
    } else if (retrain_cmd->parsed()) {
      // here --seed is the train-seed override producing Retrain*
      alteraser::cmd_retrain(resolve_config(flags, false), forget_file, flags.seed);
    } else if (warm_cmd->parsed()) {
      alteraser::cmd_warmstart(resolve_config(flags, true), forget_file, original_ckpt);
    } else if (unlearn_cmd->parsed()) {
      alteraser::cmd_unlearn(resolve_config(flags, true), forget_file, original_ckpt);
    } else if (eval_cmd->parsed()) {
      alteraser::cmd_eval(resolve_config(flags, true), checkpoints, forget_file, gold_ckpt);
    } else if (bench_cmd->parsed()) {
      alteraser::cmd_bench(resolve_config(flags, true));
    }
  } catch (const alteraser::DataError& e) {
    std::fprintf(stderr, "[%s] data error: %s\n", stage.c_str(), e.what());
    return kExitData;
  } catch (const alteraser::NumericalError& e) {
    std::fprintf(stderr, "[%s] numerical error: %s\n", stage.c_str(), e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[%s] error: %s\n", stage.c_str(), e.what());
    return kExitData;
  }
  return 0;
}
