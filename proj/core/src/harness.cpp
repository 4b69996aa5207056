#include "alteraser/harness.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "alteraser/checkpoint.hpp"
#include "alteraser/errors.hpp"

namespace alteraser {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string solver_name(InnerSolver s) {
  switch (s) {
    case InnerSolver::ah_newton: return "ah_newton";
    case InnerSolver::hf_newton: return "hf_newton";
    case InnerSolver::first_order: return "first_order";
  }
  return "?";
}

std::string solver_stem(InnerSolver s) {
  switch (s) {
    case InnerSolver::ah_newton: return "alteraser_ah";
    case InnerSolver::hf_newton: return "alteraser_hf";
    case InnerSolver::first_order: return "alteraser_first_order";
  }
  return "alteraser";
}

json train_to_json(const TrainConfig& c) {
  return json{{"learning_rate", c.learning_rate}, {"weight_decay", c.weight_decay},
              {"beta1", c.beta1},                 {"beta2", c.beta2},
              {"epsilon", c.epsilon},             {"batch_size_users", c.batch_size_users},
              {"max_epochs", c.max_epochs},       {"patience", c.patience},
              {"seed", c.seed}};
}

TrainConfig train_from_json(const json& j, TrainConfig c) {
  c.learning_rate = j.value("learning_rate", c.learning_rate);
  c.weight_decay = j.value("weight_decay", c.weight_decay);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.batch_size_users = j.value("batch_size_users", c.batch_size_users);
  c.max_epochs = j.value("max_epochs", c.max_epochs);
  c.patience = j.value("patience", c.patience);
  c.seed = j.value("seed", c.seed);
  return c;
}

json hf_to_json(const HFConfig& c) {
  return json{{"cg_tol", c.cg_tol},
              {"cg_max_iters", c.cg_max_iters},
              {"damping_init", c.damping_init},
              {"damping_up", c.damping_up},
              {"damping_down", c.damping_down},
              {"armijo_c", c.armijo_c},
              {"backtrack_shrink", c.backtrack_shrink},
              {"max_backtracks", c.max_backtracks},
              {"max_outer_iters", c.max_outer_iters}};
}

HFConfig hf_from_json(const json& j, HFConfig c) {
  c.cg_tol = j.value("cg_tol", c.cg_tol);
  c.cg_max_iters = j.value("cg_max_iters", c.cg_max_iters);
  c.damping_init = j.value("damping_init", c.damping_init);
  c.damping_up = j.value("damping_up", c.damping_up);
  c.damping_down = j.value("damping_down", c.damping_down);
  c.armijo_c = j.value("armijo_c", c.armijo_c);
  c.backtrack_shrink = j.value("backtrack_shrink", c.backtrack_shrink);
  c.max_backtracks = j.value("max_backtracks", c.max_backtracks);
  c.max_outer_iters = j.value("max_outer_iters", c.max_outer_iters);
  return c;
}

json config_to_json(const RunConfig& c) {
  json j;
  j["dataset"] = {{"format", c.dataset.format}, {"path", c.dataset.path}};
  j["split"] = {{"train_fraction", c.split.train_fraction}, {"seed", c.split.seed}};
  j["model"] = {{"d", c.model.d},           {"lambda", c.model.lambda},
                {"weight_kind", c.model.weight_kind}, {"w0", c.model.w0},
                {"w0_cap", c.model.w0_cap}, {"init_seed", c.model.init_seed}};
  j["train"] = train_to_json(c.train);
  j["forget"] = {{"scenario", c.forget.scenario},
                 {"num_users", c.forget.num_users},
                 {"seed", c.forget.seed}};
  j["unlearn"] = {{"inner_solver", solver_name(c.unlearn.inner_solver)},
                  {"max_full_passes", c.unlearn.max_full_passes},
                  {"rel_loss_tol", c.unlearn.rel_loss_tol},
                  {"hf", hf_to_json(c.unlearn.hf)},
                  {"first_order", train_to_json(c.unlearn.first_order)},
                  {"first_order_steps", c.unlearn.first_order_steps},
                  {"workers", c.unlearn.parallel_workers},
                  {"seed", c.unlearn.seed}};
  j["eval"] = {{"ks", c.eval.ks}, {"rbo_p", c.eval.rbo_p}, {"rbo_variant", c.eval.rbo_variant}};
  j["output_dir"] = c.output_dir;
  j["repeats"] = c.repeats;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  // The first-order inner solver defaults differ from the trainer defaults:
  // larger steps and no decoupled decay, so the block fixed point stays the
  // ridge solution.
  c.unlearn.first_order.learning_rate = 0.02;
  c.unlearn.first_order.weight_decay = 0.0;
  if (j.contains("dataset")) {
    c.dataset.format = j["dataset"].value("format", c.dataset.format);
    c.dataset.path = j["dataset"].value("path", c.dataset.path);
  }
  if (j.contains("split")) {
    c.split.train_fraction = j["split"].value("train_fraction", c.split.train_fraction);
    c.split.seed = j["split"].value("seed", c.split.seed);
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    c.model.d = m.value("d", c.model.d);
    c.model.lambda = m.value("lambda", c.model.lambda);
    c.model.weight_kind = m.value("weight_kind", c.model.weight_kind);
    c.model.w0 = m.value("w0", c.model.w0);
    c.model.w0_cap = m.value("w0_cap", c.model.w0_cap);
    c.model.init_seed = m.value("init_seed", c.model.init_seed);
  }
  if (j.contains("train")) c.train = train_from_json(j["train"], c.train);
  if (j.contains("forget")) {
    const auto& f = j["forget"];
    c.forget.scenario = f.value("scenario", c.forget.scenario);
    c.forget.num_users = f.value("num_users", c.forget.num_users);
    c.forget.seed = f.value("seed", c.forget.seed);
  }
  if (j.contains("unlearn")) {
    const auto& u = j["unlearn"];
    c.unlearn.inner_solver =
        parse_inner_solver(u.value("inner_solver", solver_name(c.unlearn.inner_solver)));
    c.unlearn.max_full_passes = u.value("max_full_passes", c.unlearn.max_full_passes);
    c.unlearn.rel_loss_tol = u.value("rel_loss_tol", c.unlearn.rel_loss_tol);
    if (u.contains("hf")) c.unlearn.hf = hf_from_json(u["hf"], c.unlearn.hf);
    if (u.contains("first_order"))
      c.unlearn.first_order = train_from_json(u["first_order"], c.unlearn.first_order);
    c.unlearn.first_order_steps = u.value("first_order_steps", c.unlearn.first_order_steps);
    c.unlearn.parallel_workers = u.value("workers", c.unlearn.parallel_workers);
    c.unlearn.seed = u.value("seed", c.unlearn.seed);
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    c.eval.ks = e.value("ks", c.eval.ks);
    c.eval.rbo_p = e.value("rbo_p", c.eval.rbo_p);
    c.eval.rbo_variant = e.value("rbo_variant", c.eval.rbo_variant);
  }
  c.output_dir = j.value("output_dir", c.output_dir);
  c.repeats = j.value("repeats", c.repeats);
  return c;
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

void write_manifest(const RunConfig& cfg, const fs::path& dir, const std::string& command,
                    std::vector<std::string> artifacts) {
  std::sort(artifacts.begin(), artifacts.end());
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config_to_json(cfg);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(run_config_hash(cfg)));
  manifest["config_hash"] = hash;
  manifest["artifacts"] = artifacts;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

WeightScheme make_weights(const RunConfig& cfg, const InteractionDataset& ds) {
  if (cfg.model.weight_kind == "uniform") return WeightScheme::uniform(cfg.model.w0);
  if (cfg.model.weight_kind == "item_popularity")
    return WeightScheme::item_popularity(ds, cfg.model.w0_cap);
  throw DataError("unknown weight_kind '" + cfg.model.weight_kind + "'");
}

ModelState make_initial_model(const RunConfig& cfg, const InteractionDataset& ds) {
  return ModelState::random_init(ds.num_users, ds.num_items, cfg.model.d,
                                 make_weights(cfg, ds), cfg.model.lambda,
                                 cfg.model.init_seed);
}

fs::path ensure_out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

InnerSolver parse_inner_solver(const std::string& name) {
  if (name == "ah" || name == "ah_newton") return InnerSolver::ah_newton;
  if (name == "hf" || name == "hf_newton") return InnerSolver::hf_newton;
  if (name == "first-order" || name == "first_order") return InnerSolver::first_order;
  throw DataError("unknown solver '" + name + "' (expected ah|hf|first-order)");
}

RboVariant RunConfig::rbo_variant() const {
  if (eval.rbo_variant == "min") return RboVariant::min;
  if (eval.rbo_variant == "extrapolated") return RboVariant::extrapolated;
  throw DataError("unknown rbo_variant '" + eval.rbo_variant + "'");
}

void RunConfig::validate() const {
  if (dataset.format != "movielens" && dataset.format != "tsv")
    throw DataError("dataset.format must be movielens or tsv");
  if (dataset.path.empty()) throw DataError("dataset.path is required");
  if (!(split.train_fraction > 0.0 && split.train_fraction < 1.0))
    throw DataError("split.train_fraction must lie in (0, 1)");
  if (model.d < 1) throw DataError("model.d must be >= 1");
  if (!(model.lambda > 0.0)) throw DataError("model.lambda must be > 0");
  if (forget.scenario != "privacy" && forget.scenario != "noise")
    throw DataError("forget.scenario must be privacy or noise");
  if (forget.num_users < 0) throw DataError("forget.num_users must be >= 0");
  if (repeats < 1) throw DataError("repeats must be >= 1");
  if (eval.ks.empty()) throw DataError("eval.ks must be non-empty");
  (void)rbo_variant();
  train.validate();
  unlearn.validate();
}

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw DataError(std::string("config: invalid JSON: ") + e.what());
  }
  RunConfig cfg = config_from_json(j);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open config");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_run_config(buf.str());
  if (!fs::exists(cfg.dataset.path))
    throw DataError("config: dataset path '" + cfg.dataset.path + "' does not exist");
  return cfg;
}

std::string run_config_json(const RunConfig& cfg) { return config_to_json(cfg).dump(2); }

std::uint64_t run_config_hash(const RunConfig& cfg) { return fnv1a(config_to_json(cfg).dump()); }

InteractionDataset load_and_split(const RunConfig& cfg) {
  InteractionDataset raw = cfg.dataset.format == "movielens"
                               ? load_movielens(cfg.dataset.path)
                               : load_tsv(cfg.dataset.path);
  return split_per_user(raw, cfg.split.train_fraction, cfg.split.seed);
}

void cmd_train(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  const auto ds = load_and_split(cfg);
  auto [model, log] = train(ds, cfg.train, make_initial_model(cfg, ds));
  save_checkpoint(model, (dir / "original.ckpt").string());
  log.write_csv((dir / "train_original.csv").string());
  write_manifest(cfg, dir, "train", {"original.ckpt", "train_original.csv"});
}

void cmd_make_forget(const RunConfig& cfg) {
  const auto dir = ensure_out_dir(cfg);
  const auto ds = load_and_split(cfg);
  ForgetRequest req;
  if (cfg.forget.scenario == "privacy") {
    req = gen_forget_privacy(ds, cfg.forget.num_users, cfg.forget.seed);
  } else {
    req = inject_noise_and_gen_forget(ds, cfg.forget.num_users, cfg.forget.seed).second;
  }
  save_forget_request(req, ds, (dir / "forget_request.tsv").string());
  write_manifest(cfg, dir, "make-forget", {"forget_request.tsv"});
}

namespace {

/// Rebuilds the training universe the way the run defines it: the plain
/// split for the privacy scenario, split plus injected noise for the noise
/// scenario. The forget file must describe the same pairs.
InteractionDataset build_all_data(const RunConfig& cfg, const InteractionDataset& split_ds,
                                  const ForgetRequest& req) {
  if (cfg.forget.scenario == "privacy") return split_ds;
  InteractionDataset all = split_ds;
  for (const auto& [u, v] : req.pairs) {
    auto& row = all.train_by_user[u];
    const auto it = std::lower_bound(row.begin(), row.end(), v);
    if (it != row.end() && *it == v)
      throw DataError("forget request marks an already-present pair as injected noise");
    row.insert(it, v);
  }
  all.rebuild_transpose();
  return all;
}

}  // namespace

void cmd_retrain(const RunConfig& cfg, const std::string& forget_file,
                 std::optional<std::uint64_t> seed_override) {
  const auto dir = ensure_out_dir(cfg);
  const auto split_ds = load_and_split(cfg);
  const auto req = load_forget_request(forget_file, split_ds);
  const auto all = build_all_data(cfg, split_ds, req);
  const auto remaining = apply_forget(all, req);
  TrainConfig tc = cfg.train;
  const bool star = seed_override.has_value();
  if (star) tc.seed = *seed_override;
  auto [model, log] = train(remaining, tc, make_initial_model(cfg, remaining));
  const std::string stem = star ? "retrain_star" : "retrain";
  save_checkpoint(model, (dir / (stem + ".ckpt")).string());
  log.write_csv((dir / ("train_" + stem + ".csv")).string());
  write_manifest(cfg, dir, "retrain", {stem + ".ckpt", "train_" + stem + ".csv"});
}

void cmd_warmstart(const RunConfig& cfg, const std::string& forget_file,
                   const std::string& original_ckpt) {
  const auto dir = ensure_out_dir(cfg);
  const auto split_ds = load_and_split(cfg);
  const auto req = load_forget_request(forget_file, split_ds);
  const auto all = build_all_data(cfg, split_ds, req);
  const auto remaining = apply_forget(all, req);
  const auto original = load_checkpoint(original_ckpt);
  original.check_bound_to(remaining);
  auto [model, log] = train(remaining, cfg.train, original);
  save_checkpoint(model, (dir / "warmstart.ckpt").string());
  log.write_csv((dir / "train_warmstart.csv").string());
  write_manifest(cfg, dir, "warmstart", {"warmstart.ckpt", "train_warmstart.csv"});
}

void cmd_unlearn(const RunConfig& cfg, const std::string& forget_file,
                 const std::string& original_ckpt) {
  const auto dir = ensure_out_dir(cfg);
  const auto split_ds = load_and_split(cfg);
  const auto req = load_forget_request(forget_file, split_ds);
  const auto all = build_all_data(cfg, split_ds, req);
  const auto original = load_checkpoint(original_ckpt);
  auto [model, log] = alt_erase(all, req, original, cfg.unlearn);
  const std::string stem = solver_stem(cfg.unlearn.inner_solver);
  save_checkpoint(model, (dir / (stem + ".ckpt")).string());
  log.write_csv((dir / (stem + "_log.csv")).string());
  write_manifest(cfg, dir, "unlearn", {stem + ".ckpt", stem + "_log.csv"});
}

namespace {

std::vector<int> all_user_indices(const InteractionDataset& ds) {
  std::vector<int> users(ds.num_users);
  for (int u = 0; u < ds.num_users; ++u) users[u] = u;
  return users;
}

/// Consistency + accuracy for one model under one user scope.
EvalReport evaluate_model(const RunConfig& cfg, const std::string& name,
                          const ModelState& model, const ModelState* gold,
                          const InteractionDataset& remaining, const ForgetRequest& req,
                          UserScope scope) {
  EvalReport r;
  r.method_name = name;
  r.user_scope = scope;
  if (!req.pairs.empty()) r.repredict = repredict_score(model, req.pairs);
  const std::vector<int> users = scope == UserScope::forgetting_users
                                     ? req.forgetting_users
                                     : all_user_indices(remaining);
  if (gold != nullptr)
    r.rbo_at = consistency_report(model, *gold, users, remaining, cfg.eval.ks, cfg.eval.rbo_p,
                                  cfg.rbo_variant());
  for (const auto& [k, pair] : accuracy_report(model, remaining, users, cfg.eval.ks)) {
    r.recall_at[k] = pair.first;
    r.ndcg_at[k] = pair.second;
  }
  return r;
}

struct BenchMethod {
  std::string name;
  ModelState model;
  double seconds = 0.0;
};

std::vector<EvalReport> run_bench_once(const RunConfig& cfg, const fs::path& dir) {
  const auto split_ds = load_and_split(cfg);

  InteractionDataset all = split_ds;
  ForgetRequest req;
  if (cfg.forget.scenario == "privacy") {
    req = gen_forget_privacy(split_ds, cfg.forget.num_users, cfg.forget.seed);
  } else {
    std::tie(all, req) =
        inject_noise_and_gen_forget(split_ds, cfg.forget.num_users, cfg.forget.seed);
  }
  save_forget_request(req, all, (dir / "forget_request.tsv").string());
  const auto remaining = apply_forget(all, req);

  std::vector<std::string> artifacts = {"forget_request.tsv", "eval.csv", "eval.md"};
  const auto record_train = [&](const std::string& stem, const InteractionDataset& ds,
                                const TrainConfig& tc, const ModelState& init) {
    auto [model, log] = train(ds, tc, init);
    save_checkpoint(model, (dir / (stem + ".ckpt")).string());
    log.write_csv((dir / ("train_" + stem + ".csv")).string());
    artifacts.push_back(stem + ".ckpt");
    artifacts.push_back("train_" + stem + ".csv");
    return BenchMethod{stem, std::move(model), log.total_seconds};
  };

  const auto original = record_train("original", all, cfg.train, make_initial_model(cfg, all));
  auto retrain_method =
      record_train("retrain", remaining, cfg.train, make_initial_model(cfg, remaining));
  TrainConfig star_cfg = cfg.train;
  star_cfg.seed = cfg.train.seed + 1;
  const auto retrain_star =
      record_train("retrain_star", remaining, star_cfg, make_initial_model(cfg, remaining));
  const auto warmstart = record_train("warmstart", remaining, cfg.train, original.model);

  const auto record_unlearn = [&](const std::string& stem, InnerSolver solver) {
    UnlearnConfig uc = cfg.unlearn;
    uc.inner_solver = solver;
    auto [model, log] = alt_erase(all, req, original.model, uc);
    save_checkpoint(model, (dir / (stem + ".ckpt")).string());
    log.write_csv((dir / (stem + "_log.csv")).string());
    artifacts.push_back(stem + ".ckpt");
    artifacts.push_back(stem + "_log.csv");
    return BenchMethod{stem, std::move(model), log.total_seconds};
  };
  const auto alt_ah = record_unlearn("alteraser_ah", InnerSolver::ah_newton);
  const auto alt_hf = record_unlearn("alteraser_hf", InnerSolver::hf_newton);
  const auto alt_fo = record_unlearn("alteraser_first_order", InnerSolver::first_order);

  const std::vector<std::pair<const BenchMethod*, std::string>> rows = {
      {&original, "Original"},
      {&retrain_method, "Retrain"},
      {&retrain_star, "Retrain*"},
      {&warmstart, "Warm-Start"},
      {&alt_ah, "AltEraser[AH-Newton]"},
      {&alt_hf, "AltEraser[HF-Newton]"},
      {&alt_fo, "AltEraser[1st-order]"},
  };

  std::vector<EvalReport> reports;
  for (const auto& [method, label] : rows) {
    for (UserScope scope : {UserScope::forgetting_users, UserScope::all_users}) {
      EvalReport r = evaluate_model(cfg, label, method->model, &retrain_method.model,
                                    remaining, req, scope);
      r.runtime_seconds = method->seconds;
      if (label != "Original") r.speedup_vs_retrain = retrain_method.seconds / method->seconds;
      reports.push_back(std::move(r));
    }
  }

  write_reports_csv(reports, (dir / "eval.csv").string());
  write_text(dir / "eval.md", reports_markdown(reports));
  write_manifest(cfg, dir, "bench", artifacts);
  return reports;
}

void average_into(std::map<int, double>& acc, const std::map<int, double>& add) {
  for (const auto& [k, v] : add) acc[k] += v;
}

}  // namespace

std::vector<EvalReport> cmd_eval(const RunConfig& cfg,
                                 const std::vector<std::string>& checkpoints,
                                 const std::string& forget_file,
                                 const std::string& gold_ckpt) {
  const auto dir = ensure_out_dir(cfg);
  const auto split_ds = load_and_split(cfg);
  ForgetRequest req;
  InteractionDataset all = split_ds;
  if (!forget_file.empty()) {
    req = load_forget_request(forget_file, split_ds);
    all = build_all_data(cfg, split_ds, req);
  }
  const auto remaining = apply_forget(all, req);

  std::optional<ModelState> gold;
  if (!gold_ckpt.empty()) {
    gold = load_checkpoint(gold_ckpt);
    gold->check_bound_to(remaining);
  }

  std::vector<EvalReport> reports;
  for (const auto& path : checkpoints) {
    ModelState model = load_checkpoint(path);
    model.check_bound_to(remaining);
    const std::string label = fs::path(path).stem().string();
    if (!req.forgetting_users.empty())
      reports.push_back(evaluate_model(cfg, label, model, gold ? &*gold : nullptr, remaining,
                                       req, UserScope::forgetting_users));
    reports.push_back(evaluate_model(cfg, label, model, gold ? &*gold : nullptr, remaining,
                                     req, UserScope::all_users));
  }
  write_reports_csv(reports, (dir / "eval.csv").string());
  write_text(dir / "eval.md", reports_markdown(reports));
  write_manifest(cfg, dir, "eval", {"eval.csv", "eval.md"});
  return reports;
}

std::vector<EvalReport> cmd_bench(const RunConfig& cfg) {
  cfg.validate();
  const auto dir = ensure_out_dir(cfg);
  if (cfg.repeats == 1) return run_bench_once(cfg, dir);

  // Repeats: derived seeds per run, metric fields averaged at the top level.
  std::vector<EvalReport> avg;
  for (int r = 0; r < cfg.repeats; ++r) {
    RunConfig run = cfg;
    run.split.seed = cfg.split.seed + static_cast<std::uint64_t>(r);
    run.forget.seed = cfg.forget.seed + static_cast<std::uint64_t>(r);
    run.model.init_seed = cfg.model.init_seed + static_cast<std::uint64_t>(r);
    run.train.seed = cfg.train.seed + static_cast<std::uint64_t>(r);
    run.output_dir = (dir / ("repeat_" + std::to_string(r))).string();
    const auto reports = run_bench_once(run, ensure_out_dir(run));
    if (avg.empty()) {
      avg = reports;
    } else {
      for (std::size_t i = 0; i < avg.size(); ++i) {
        avg[i].repredict += reports[i].repredict;
        average_into(avg[i].rbo_at, reports[i].rbo_at);
        average_into(avg[i].recall_at, reports[i].recall_at);
        average_into(avg[i].ndcg_at, reports[i].ndcg_at);
        avg[i].runtime_seconds += reports[i].runtime_seconds;
      }
    }
  }
  const double n = cfg.repeats;
  double retrain_seconds = 0.0;
  for (auto& r : avg) {
    r.repredict /= n;
    for (auto& [k, v] : r.rbo_at) v /= n;
    for (auto& [k, v] : r.recall_at) v /= n;
    for (auto& [k, v] : r.ndcg_at) v /= n;
    r.runtime_seconds /= n;
    if (r.method_name == "Retrain") retrain_seconds = r.runtime_seconds;
  }
  for (auto& r : avg) {
    if (r.method_name != "Original") r.speedup_vs_retrain = retrain_seconds / r.runtime_seconds;
  }
  write_reports_csv(avg, (dir / "eval.csv").string());
  write_text(dir / "eval.md", reports_markdown(avg));
  write_manifest(cfg, dir, "bench", {"eval.csv", "eval.md"});
  return avg;
}

}  // namespace alteraser
