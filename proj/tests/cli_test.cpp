#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "support/synthetic.hpp"

// Exercises the installed-style binary end to end: exit codes 0 on success,
// 1 on usage errors, 2 on data errors.

namespace {

int run_cli(const std::string& args) {
  const std::string cmd = std::string(ALTERASER_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string write_config(const std::filesystem::path& dir, const std::string& data_path,
                         const std::string& out_dir, const std::string& name = "config.json") {
  const auto path = dir / name;
  std::ofstream out(path);
  out << R"({
  "dataset": {"format": "tsv", "path": ")" << data_path << R"("},
  "split": {"train_fraction": 0.8, "seed": 1},
  "model": {"d": 4, "lambda": 0.01, "w0": 0.05, "init_seed": 2},
  "train": {"learning_rate": 0.05, "batch_size_users": 16, "max_epochs": 8,
            "patience": 3, "seed": 3},
  "forget": {"scenario": "privacy", "num_users": 3, "seed": 4},
  "unlearn": {"inner_solver": "ah", "max_full_passes": 2},
  "eval": {"ks": [5]},
  "output_dir": ")" << out_dir << R"("
})";
  return path.string();
}

}  // namespace

TEST_CASE("cli exit codes and artifact flow") {
  const auto dir = synth::scratch_dir("cli");
  const auto ds = synth::planted_dataset(20, 24, 4, 8, 0.85, 3);
  const auto data_path = (dir / "data.tsv").string();
  synth::write_tsv(ds, data_path);
  const auto out_dir = (dir / "out").string();
  const auto config = write_config(dir, data_path, out_dir);

  SUBCASE("missing subcommand is a usage error") { CHECK(run_cli("") == 1); }
  SUBCASE("unknown flag is a usage error") { CHECK(run_cli("train --bogus") == 1); }
  SUBCASE("missing config file is a data error") {
    CHECK(run_cli("train --config /nonexistent.json") == 1);  // CLI11 ExistingFile check
  }
  SUBCASE("config pointing at a missing dataset is a data error") {
    const auto bad = dir / "bad.json";
    std::ofstream(bad) << R"({"dataset":{"path":"/no/such/file.tsv"}})";
    CHECK(run_cli("train --config " + bad.string()) == 2);
  }
  SUBCASE("train, forget, unlearn and eval succeed end to end") {
    REQUIRE(run_cli("train --config " + config) == 0);
    REQUIRE(std::filesystem::exists(std::filesystem::path(out_dir) / "original.ckpt"));
    REQUIRE(run_cli("make-forget --config " + config) == 0);
    const auto forget = (std::filesystem::path(out_dir) / "forget_request.tsv").string();
    const auto original = (std::filesystem::path(out_dir) / "original.ckpt").string();
    REQUIRE(run_cli("retrain --config " + config + " --forget " + forget) == 0);
    REQUIRE(run_cli("unlearn --config " + config + " --forget " + forget + " --init " +
                    original + " --solver hf") == 0);
    CHECK(std::filesystem::exists(std::filesystem::path(out_dir) / "alteraser_hf.ckpt"));
    CHECK(run_cli("eval --config " + config + " --forget " + forget + " --gold " +
                  (std::filesystem::path(out_dir) / "retrain.ckpt").string() + " " +
                  (std::filesystem::path(out_dir) / "alteraser_hf.ckpt").string()) == 0);

    // checkpoint from a mismatched dataset shape: data error, exit 2
    const auto other = synth::random_dataset(7, 9, 3, 5);
    const auto other_path = (dir / "other.tsv").string();
    synth::write_tsv(other, other_path);
    const auto other_cfg = write_config(dir, other_path, (dir / "out2").string(), "other.json");
    CHECK(run_cli("eval --config " + other_cfg + " " +
                  (std::filesystem::path(out_dir) / "original.ckpt").string()) == 2);
  }
}
