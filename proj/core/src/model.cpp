#include "alteraser/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "alteraser/errors.hpp"
#include "alteraser/rng.hpp"

namespace alteraser {

Eigen::VectorXd WeightScheme::weight_vector(int n) const {
  if (kind == WeightKind::uniform) return Eigen::VectorXd::Constant(n, w0);
  if (w0_per_item.size() != n)
    throw DataError("weight scheme: w0_per_item size does not match item count");
  return w0_per_item;
}

WeightScheme WeightScheme::uniform(double w0) {
  if (w0 < 0.0 || w0 > 1.0) throw DataError("uniform weight w0 must lie in [0, 1]");
  WeightScheme w;
  w.kind = WeightKind::uniform;
  w.w0 = w0;
  return w;
}

WeightScheme WeightScheme::item_popularity(const InteractionDataset& ds, double cap) {
  if (cap < 0.0 || cap > 1.0) throw DataError("popularity weight cap must lie in [0, 1]");
  WeightScheme w;
  w.kind = WeightKind::item_popularity;
  w.w0_cap = cap;
  w.w0_per_item.resize(ds.num_items);
  double max_freq = 0.0;
  for (int v = 0; v < ds.num_items; ++v)
    max_freq = std::max(max_freq, static_cast<double>(ds.train_by_item[v].size()));
  if (max_freq == 0.0) max_freq = 1.0;
  for (int v = 0; v < ds.num_items; ++v)
    w.w0_per_item[v] = cap * static_cast<double>(ds.train_by_item[v].size()) / max_freq;
  return w;
}

ModelState::ModelState(RowMatrixXd P, RowMatrixXd Q, Eigen::VectorXd h, WeightScheme weights,
                       double lambda, std::uint64_t init_seed)
    : P_(std::move(P)),
      Q_(std::move(Q)),
      h_(std::move(h)),
      weights_(std::move(weights)),
      lambda_(lambda),
      init_seed_(init_seed) {
  if (!(lambda_ > 0.0)) throw DataError("model: lambda must be > 0");
  if (P_.cols() != h_.size() || Q_.cols() != h_.size())
    throw DataError("model: embedding dims disagree with h");
  if (!P_.allFinite() || !Q_.allFinite() || !h_.allFinite())
    throw DataError("model: non-finite parameter entries");
}

ModelState ModelState::random_init(int num_users, int num_items, int dim,
                                   const WeightScheme& weights, double lambda,
                                   std::uint64_t seed) {
  rng::Engine eng(seed);
  RowMatrixXd P(num_users, dim), Q(num_items, dim);
  for (int i = 0; i < num_users; ++i)
    for (int a = 0; a < dim; ++a) P(i, a) = 0.01 * rng::normal(eng);
  for (int i = 0; i < num_items; ++i)
    for (int a = 0; a < dim; ++a) Q(i, a) = 0.01 * rng::normal(eng);
  return ModelState(std::move(P), std::move(Q), Eigen::VectorXd::Ones(dim), weights, lambda,
                    seed);
}

double ModelState::predict(int u, int v) const {
  if (u < 0 || u >= num_users()) throw std::out_of_range("predict: user index out of range");
  if (v < 0 || v >= num_items()) throw std::out_of_range("predict: item index out of range");
  return (P_.row(u).transpose().array() * Q_.row(v).transpose().array() * h_.array()).sum();
}

Eigen::VectorXd ModelState::scores_for_user(int u) const {
  if (u < 0 || u >= num_users())
    throw std::out_of_range("scores_for_user: user index out of range");
  const Eigen::VectorXd c = h_.cwiseProduct(P_.row(u).transpose());
  return Q_ * c;
}

std::vector<int> ModelState::predict_topk(int u, int k,
                                          const std::vector<int>& exclude_sorted) const {
  if (k < 1) throw std::out_of_range("predict_topk: k must be >= 1");
  const Eigen::VectorXd scores = scores_for_user(u);
  std::vector<int> candidates;
  candidates.reserve(num_items());
  for (int v = 0; v < num_items(); ++v) {
    if (!std::binary_search(exclude_sorted.begin(), exclude_sorted.end(), v))
      candidates.push_back(v);
  }
  const auto by_score = [&scores](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  };
  const std::size_t take = std::min<std::size_t>(k, candidates.size());
  std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), by_score);
  candidates.resize(take);
  return candidates;
}

void ModelState::refresh_gram_cache() {
  cache_.user_scatter.noalias() = P_.transpose() * P_;
  const Eigen::VectorXd wv = weights_.weight_vector(num_items());
  cache_.item_scatter_w.noalias() =
      Q_.transpose() * wv.asDiagonal() * Q_;
  cache_.version = version_;
}

const GramCache& ModelState::gram_cache() const {
  if (cache_.version != version_)
    throw StaleCacheError("gram cache is stale; call refresh_gram_cache() after mutation");
  return cache_;
}

void ModelState::check_bound_to(const InteractionDataset& ds) const {
  if (num_users() != ds.num_users || num_items() != ds.num_items)
    throw DataError("model shape (" + std::to_string(num_users()) + " x " +
                    std::to_string(num_items()) + ") does not match dataset (" +
                    std::to_string(ds.num_users) + " x " + std::to_string(ds.num_items) + ")");
  if (weights_.kind == WeightKind::item_popularity &&
      weights_.w0_per_item.size() != ds.num_items)
    throw DataError("model: popularity weights size does not match dataset");
}

double loss_naive(const ModelState& model, const InteractionDataset& ds) {
  model.check_bound_to(ds);
  const auto& P = model.P();
  const auto& Q = model.Q();
  const auto& h = model.h();
  const int d = model.dim();
  double acc = 0.0;
  for (int u = 0; u < ds.num_users; ++u) {
    const auto& observed = ds.train_by_user[u];
    std::size_t next = 0;
    for (int v = 0; v < ds.num_items; ++v) {
      double yhat = 0.0;
      for (int a = 0; a < d; ++a) yhat += h[a] * P(u, a) * Q(v, a);
      const bool is_observed = next < observed.size() && observed[next] == v;
      if (is_observed) ++next;
      const double y = is_observed ? 1.0 : 0.0;
      const double w = is_observed ? 1.0 : model.weights().item_weight(v);
      acc += w * (y - yhat) * (y - yhat);
    }
  }
  const double l2 = model.P().squaredNorm() + model.Q().squaredNorm() + h.squaredNorm();
  return 0.5 * acc + 0.5 * model.lambda() * l2;
}

double loss_efficient(const ModelState& model, const InteractionDataset& ds) {
  model.check_bound_to(ds);
  const auto& P = model.P();
  const auto& Q = model.Q();
  const auto& h = model.h();
  const Eigen::VectorXd wv = model.weights().weight_vector(ds.num_items);

  // observed-entry correction: (1 - w0_v) yhat^2 - 2 yhat + 1 per train pair
  double obs = 0.0;
  for (int u = 0; u < ds.num_users; ++u) {
    const Eigen::VectorXd c = h.cwiseProduct(P.row(u).transpose());
    for (int v : ds.train_by_user[u]) {
      const double yhat = Q.row(v) * c;
      obs += (1.0 - wv[v]) * yhat * yhat - 2.0 * yhat + 1.0;
    }
  }

  // all-entries term: sum_u p_u^T G_Q p_u = <S_Qw * h h^T, P^T P>
  const Eigen::MatrixXd item_scatter_w = Q.transpose() * wv.asDiagonal() * Q;
  const Eigen::MatrixXd user_scatter = P.transpose() * P;
  const Eigen::MatrixXd hh = h * h.transpose();
  const double all = item_scatter_w.cwiseProduct(hh).cwiseProduct(user_scatter).sum();

  const double l2 = P.squaredNorm() + Q.squaredNorm() + h.squaredNorm();
  return 0.5 * obs + 0.5 * all + 0.5 * model.lambda() * l2;
}

Eigen::VectorXd grad_user(const ModelState& model, const InteractionDataset& ds, int u) {
  model.check_bound_to(ds);
  const auto& cache = model.gram_cache();
  const auto& Q = model.Q();
  const auto& h = model.h();
  const Eigen::VectorXd p = model.P().row(u).transpose();
  const Eigen::VectorXd c = h.cwiseProduct(p);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.dim());
  for (int v : ds.train_by_user[u]) {
    const Eigen::VectorXd a = h.cwiseProduct(Q.row(v).transpose());
    const double yhat = a.dot(p);
    g += ((1.0 - model.weights().item_weight(v)) * yhat - 1.0) * a;
  }
  // G_Q p = h * (S_Qw (h * p))
  g += h.cwiseProduct(cache.item_scatter_w * c);
  g += model.lambda() * p;
  return g;
}

Eigen::VectorXd grad_item(const ModelState& model, const InteractionDataset& ds, int v) {
  model.check_bound_to(ds);
  const auto& cache = model.gram_cache();
  const auto& P = model.P();
  const auto& h = model.h();
  const Eigen::VectorXd q = model.Q().row(v).transpose();
  const Eigen::VectorXd a = h.cwiseProduct(q);
  const double w0v = model.weights().item_weight(v);
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.dim());
  for (int u : ds.train_by_item[v]) {
    const Eigen::VectorXd c = h.cwiseProduct(P.row(u).transpose());
    const double yhat = c.dot(q);
    g += ((1.0 - w0v) * yhat - 1.0) * c;
  }
  g += w0v * h.cwiseProduct(cache.user_scatter * a);
  g += model.lambda() * q;
  return g;
}

Eigen::VectorXd grad_h(const ModelState& model, const InteractionDataset& ds) {
  model.check_bound_to(ds);
  const auto& cache = model.gram_cache();
  const auto& P = model.P();
  const auto& Q = model.Q();
  const auto& h = model.h();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(model.dim());
  for (int u = 0; u < ds.num_users; ++u) {
    const Eigen::VectorXd p = P.row(u).transpose();
    for (int v : ds.train_by_user[u]) {
      const Eigen::VectorXd b = p.cwiseProduct(Q.row(v).transpose());
      const double yhat = h.dot(b);
      g += ((1.0 - model.weights().item_weight(v)) * yhat - 1.0) * b;
    }
  }
  g += cache.user_scatter.cwiseProduct(cache.item_scatter_w) * h;
  g += model.lambda() * h;
  return g;
}

}  // namespace alteraser
