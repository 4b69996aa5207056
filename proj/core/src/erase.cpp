#include "alteraser/erase.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "alteraser/errors.hpp"

namespace alteraser {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Static contiguous chunking across `workers` threads. Each index is
/// processed by exactly one thread; fn(i) must write disjoint state.
template <typename Fn>
void parallel_blocks(std::size_t count, int workers, Fn&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  const std::size_t threads = std::min<std::size_t>(workers, count);
  std::vector<std::thread> pool;
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = t * chunk;
    const std::size_t hi = std::min(count, lo + chunk);
    pool.emplace_back([&, lo, hi]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

Eigen::VectorXd solve_block(const SubproblemSpec& spec, const Eigen::VectorXd& warm,
                            const UnlearnConfig& cfg) {
  switch (cfg.inner_solver) {
    case InnerSolver::ah_newton:
      return ah_newton_solve(spec);
    case InnerSolver::hf_newton:
      return hf_newton_solve(spec, warm, cfg.hf).x;
    case InnerSolver::first_order:
      return first_order_substep(spec, warm, cfg.first_order, cfg.first_order_steps);
  }
  throw NumericalError("unknown inner solver");
}

std::vector<int> users_of(const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> out;
  for (const auto& [u, v] : pairs) out.push_back(u);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> items_of(const std::vector<std::pair<int, int>>& pairs) {
  std::vector<int> out;
  for (const auto& [u, v] : pairs) out.push_back(v);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<int> nonempty_rows(const std::vector<std::vector<int>>& adjacency) {
  std::vector<int> out;
  for (std::size_t i = 0; i < adjacency.size(); ++i)
    if (!adjacency[i].empty()) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace

void UnlearnConfig::validate() const {
  if (max_full_passes < 0) throw DataError("unlearn: max_full_passes must be >= 0");
  if (!(rel_loss_tol > 0.0)) throw DataError("unlearn: rel_loss_tol must be > 0");
  if (parallel_workers < 1) throw DataError("unlearn: parallel_workers must be >= 1");
  if (first_order_steps < 1) throw DataError("unlearn: first_order_steps must be >= 1");
}

void UnlearnLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "pass,phase,blocks_solved,loss_after,elapsed_seconds\n";
  for (const auto& e : entries) {
    char line[128];
    std::snprintf(line, sizeof(line), "%d,%s,%d,%.17g,%.3f\n", e.pass, e.phase.c_str(),
                  e.blocks_solved, e.loss_after, e.elapsed_seconds);
    out << line;
  }
}

bool stopping_check(const std::vector<double>& loss_history, const UnlearnConfig& cfg) {
  const int full_passes_done = static_cast<int>(loss_history.size()) - 1;
  if (full_passes_done >= cfg.max_full_passes) return true;
  if (loss_history.size() >= 2) {
    const double prev = loss_history[loss_history.size() - 2];
    const double curr = loss_history.back();
    const double rel = (prev - curr) / std::max(std::abs(prev), 1e-12);
    if (rel < cfg.rel_loss_tol) return true;
  }
  return false;
}

void one_erase_pass(const std::vector<int>& users, const std::vector<int>& items,
                    const InteractionDataset& remaining, ModelState& model,
                    const UnlearnConfig& cfg) {
  model.check_bound_to(remaining);
  const int d = model.dim();
  const Eigen::VectorXd h = model.h();
  const Eigen::VectorXd wv = model.weights().weight_vector(remaining.num_items);

  // user phase: item side fixed, one shared Gram
  {
    const Eigen::MatrixXd item_gram = build_gram(model.Q(), h, wv);
    const RowMatrixXd& Q = model.Q();
    RowMatrixXd& P = model.mutable_P();
    parallel_blocks(users.size(), cfg.parallel_workers, [&](std::size_t i) {
      const int u = users[i];
      const auto& observed = remaining.train_by_user[u];
      RowMatrixXd design(observed.size(), d);
      Eigen::VectorXd weights(observed.size());
      for (std::size_t r = 0; r < observed.size(); ++r) {
        design.row(r) = Q.row(observed[r]).cwiseProduct(h.transpose());
        weights[r] = 1.0 - wv[observed[r]];
      }
      auto spec = SubproblemSpec::make(std::move(design), std::move(weights), item_gram,
                                       model.lambda(), u, /*check_gram=*/false);
      try {
        P.row(u) = solve_block(spec, P.row(u).transpose(), cfg).transpose();
      } catch (const NumericalError& e) {
        throw NumericalError("user phase, block " + std::to_string(u) + ": " + e.what());
      }
    });
  }

  // item phase: user side fixed, Gram rebuilt from the updated users
  {
    const Eigen::MatrixXd user_gram =
        build_gram(model.P(), h, Eigen::VectorXd::Ones(remaining.num_users));
    const RowMatrixXd& P = model.P();
    RowMatrixXd& Q = model.mutable_Q();
    parallel_blocks(items.size(), cfg.parallel_workers, [&](std::size_t i) {
      const int v = items[i];
      const auto& observed = remaining.train_by_item[v];
      RowMatrixXd design(observed.size(), d);
      Eigen::VectorXd weights(observed.size());
      for (std::size_t r = 0; r < observed.size(); ++r) {
        design.row(r) = P.row(observed[r]).cwiseProduct(h.transpose());
        weights[r] = 1.0 - wv[v];
      }
      auto spec = SubproblemSpec::make(std::move(design), std::move(weights),
                                       wv[v] * user_gram, model.lambda(), v,
                                       /*check_gram=*/false);
      try {
        Q.row(v) = solve_block(spec, Q.row(v).transpose(), cfg).transpose();
      } catch (const NumericalError& e) {
        throw NumericalError("item phase, block " + std::to_string(v) + ": " + e.what());
      }
    });
  }
}

std::pair<ModelState, UnlearnLog> alt_erase(const InteractionDataset& ds_all,
                                            const ForgetRequest& req,
                                            const ModelState& original,
                                            const UnlearnConfig& cfg) {
  cfg.validate();
  original.check_bound_to(ds_all);
  const auto start = std::chrono::steady_clock::now();

  const InteractionDataset remaining = apply_forget(ds_all, req);
  ModelState model = original;  // warm start; h stays fixed throughout

  UnlearnLog log;
  std::vector<double> history;

  const auto run_pass = [&](int pass, const char* phase, const std::vector<int>& users,
                            const std::vector<int>& items) {
    const double t0 = seconds_since(start);
    try {
      one_erase_pass(users, items, remaining, model, cfg);
    } catch (const NumericalError& e) {
      throw NumericalError("pass " + std::to_string(pass) + ", " + e.what());
    }
    const double elapsed = seconds_since(start) - t0;
    const double loss = loss_efficient(model, remaining);
    history.push_back(loss);
    log.entries.push_back(
        {pass, phase, static_cast<int>(users.size() + items.size()), loss, elapsed});
  };

  run_pass(0, "targeted", users_of(req.pairs), items_of(req.pairs));

  const std::vector<int> remaining_users = nonempty_rows(remaining.train_by_user);
  const std::vector<int> remaining_items = nonempty_rows(remaining.train_by_item);
  int pass = 1;
  while (!stopping_check(history, cfg)) {
    run_pass(pass, "full", remaining_users, remaining_items);
    ++pass;
  }

  log.total_seconds = seconds_since(start);
  return {std::move(model), std::move(log)};
}

}  // namespace alteraser
