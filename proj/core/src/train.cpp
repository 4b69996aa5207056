#include "alteraser/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "alteraser/errors.hpp"
#include "alteraser/rng.hpp"

namespace alteraser {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Row-sliced AdamW state. Moments live per parameter row; bias correction
/// uses the global step count, rows update only when touched.
struct AdamRows {
  RowMatrixXd m, v;
  explicit AdamRows(Eigen::Index rows, Eigen::Index cols)
      : m(RowMatrixXd::Zero(rows, cols)), v(RowMatrixXd::Zero(rows, cols)) {}

  void step_row(Eigen::Index row, const Eigen::VectorXd& grad, Eigen::Ref<RowMatrixXd> params,
                const TrainConfig& cfg, long t) {
    m.row(row) = cfg.beta1 * m.row(row) + (1.0 - cfg.beta1) * grad.transpose();
    v.row(row) =
        cfg.beta2 * v.row(row) + (1.0 - cfg.beta2) * grad.array().square().matrix().transpose();
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    const Eigen::ArrayXd mhat = m.row(row).transpose().array() / bc1;
    const Eigen::ArrayXd vhat = v.row(row).transpose().array() / bc2;
    params.row(row) -=
        (cfg.learning_rate * (mhat / (vhat.sqrt() + cfg.epsilon))).matrix().transpose();
    params.row(row) *= (1.0 - cfg.learning_rate * cfg.weight_decay);
  }
};

}  // namespace

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw DataError("train: learning_rate must be > 0");
  if (weight_decay < 0.0) throw DataError("train: weight_decay must be >= 0");
  if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
    throw DataError("train: beta1/beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw DataError("train: epsilon must be > 0");
  if (batch_size_users < 1) throw DataError("train: batch_size_users must be >= 1");
  if (max_epochs < 1) throw DataError("train: max_epochs must be >= 1");
  if (patience < 1) throw DataError("train: patience must be >= 1");
}

void TrainLog::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "epoch,train_loss,elapsed_seconds\n";
  for (const auto& e : entries) {
    char line[96];
    std::snprintf(line, sizeof(line), "%d,%.17g,%.3f\n", e.epoch, e.train_loss,
                  e.elapsed_seconds);
    out << line;
  }
}

std::pair<ModelState, TrainLog> train(const InteractionDataset& ds, const TrainConfig& cfg,
                                      const ModelState& init) {
  cfg.validate();
  init.check_bound_to(ds);
  const auto start = std::chrono::steady_clock::now();

  ModelState model = init;
  const int m = ds.num_users;
  const int d = model.dim();
  const Eigen::VectorXd wv = model.weights().weight_vector(ds.num_items);

  AdamRows adam_p(m, d), adam_q(ds.num_items, d);
  AdamRows adam_h(1, d);
  long step_count = 0;

  TrainLog log;
  double loss = loss_efficient(model, ds);
  if (!std::isfinite(loss))
    throw NumericalError("training diverged at epoch 0 (non-finite initial loss)");
  log.entries.push_back({0, loss, seconds_since(start)});
  ModelState best = model;
  double best_loss = loss;
  int best_epoch = 0;
  int epochs_since_best = 0;

  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  rng::Engine eng(cfg.seed);

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng::shuffle(order, eng);
    for (int begin = 0; begin < m; begin += cfg.batch_size_users) {
      const int end = std::min(m, begin + cfg.batch_size_users);
      model.refresh_gram_cache();
      const Eigen::MatrixXd item_scatter_w = model.gram_cache().item_scatter_w;

      // One sweep over the batch's pairs collects the user gradients and the
      // observed-entry parts of the item and h gradients.
      const auto& P = model.P();
      const auto& Q = model.Q();
      const auto& h = model.h();
      std::vector<std::pair<int, Eigen::VectorXd>> user_grads;
      user_grads.reserve(end - begin);
      std::vector<int> touched;  // items seen in this batch, insertion order
      std::vector<int> item_slot(ds.num_items, -1);
      std::vector<Eigen::VectorXd> item_grads;
      Eigen::VectorXd h_grad = Eigen::VectorXd::Zero(d);
      Eigen::MatrixXd batch_user_scatter = Eigen::MatrixXd::Zero(d, d);

      for (int bi = begin; bi < end; ++bi) {
        const int u = order[bi];
        const Eigen::VectorXd p = P.row(u).transpose();
        const Eigen::VectorXd c = h.cwiseProduct(p);
        batch_user_scatter.noalias() += p * p.transpose();
        Eigen::VectorXd gp = Eigen::VectorXd::Zero(d);
        for (int v : ds.train_by_user[u]) {
          const Eigen::VectorXd q = Q.row(v).transpose();
          const Eigen::VectorXd a = h.cwiseProduct(q);
          const double yhat = a.dot(p);
          const double coef = (1.0 - wv[v]) * yhat - 1.0;
          gp += coef * a;
          if (item_slot[v] < 0) {
            item_slot[v] = static_cast<int>(touched.size());
            touched.push_back(v);
            item_grads.emplace_back(Eigen::VectorXd::Zero(d));
          }
          item_grads[item_slot[v]] += coef * c;
          h_grad += coef * p.cwiseProduct(q);
        }
        gp += h.cwiseProduct(item_scatter_w * c);
        gp += model.lambda() * p;
        user_grads.emplace_back(u, std::move(gp));
      }

      // all-entries and L2 parts, restricted to the batch's user scatter
      for (std::size_t s = 0; s < touched.size(); ++s) {
        const int v = touched[s];
        const Eigen::VectorXd q = Q.row(v).transpose();
        item_grads[s] += wv[v] * h.cwiseProduct(batch_user_scatter * h.cwiseProduct(q));
        item_grads[s] += model.lambda() * q;
      }
      h_grad += batch_user_scatter.cwiseProduct(item_scatter_w) * h;
      h_grad += model.lambda() * h;

      ++step_count;
      auto& Pm = model.mutable_P();
      for (const auto& [u, gp] : user_grads) adam_p.step_row(u, gp, Pm, cfg, step_count);
      auto& Qm = model.mutable_Q();
      for (std::size_t s = 0; s < touched.size(); ++s)
        adam_q.step_row(touched[s], item_grads[s], Qm, cfg, step_count);
      RowMatrixXd h_row = model.h().transpose();
      adam_h.step_row(0, h_grad, h_row, cfg, step_count);
      model.mutable_h() = h_row.row(0).transpose();
    }

    loss = loss_efficient(model, ds);
    log.entries.push_back({epoch, loss, seconds_since(start)});
    if (!std::isfinite(loss))
      throw NumericalError("training diverged at epoch " + std::to_string(epoch));
    if (loss < best_loss) {
      best_loss = loss;
      best_epoch = epoch;
      best = model;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    if (epochs_since_best >= cfg.patience) break;
  }

  log.best_epoch = best_epoch;
  log.best_loss = best_loss;
  log.total_seconds = seconds_since(start);
  return {std::move(best), std::move(log)};
}

Eigen::VectorXd first_order_substep(const SubproblemSpec& spec, const Eigen::VectorXd& start,
                                    const TrainConfig& cfg, int steps) {
  Eigen::VectorXd x = start;
  Eigen::VectorXd m = Eigen::VectorXd::Zero(x.size());
  Eigen::VectorXd v = Eigen::VectorXd::Zero(x.size());
  for (int t = 1; t <= steps; ++t) {
    const Eigen::VectorXd g = block_gradient(spec, x);
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
    const Eigen::ArrayXd mhat = m.array() / bc1;
    const Eigen::ArrayXd vhat = v.array() / bc2;
    x -= (cfg.learning_rate * (mhat / (vhat.sqrt() + cfg.epsilon))).matrix();
    x *= (1.0 - cfg.learning_rate * cfg.weight_decay);
  }
  return x;
}

}  // namespace alteraser
