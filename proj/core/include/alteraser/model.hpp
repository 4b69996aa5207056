#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <vector>

#include "alteraser/dataset.hpp"

namespace alteraser {

using RowMatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class WeightKind { uniform, item_popularity };

/// Confidence weights of the non-sampling loss: observed entries weigh 1,
/// missing entries weigh w0 (uniform) or a per-item weight proportional to
/// item training frequency and capped at w0_cap.
struct WeightScheme {
  WeightKind kind = WeightKind::uniform;
  double w0 = 0.05;
  double w0_cap = 0.1;
  Eigen::VectorXd w0_per_item;  // popularity case only, size n

  double item_weight(int v) const {
    return kind == WeightKind::uniform ? w0 : w0_per_item[v];
  }
  /// Missing-entry weight for every item as an n-vector.
  Eigen::VectorXd weight_vector(int n) const;

  static WeightScheme uniform(double w0);
  static WeightScheme item_popularity(const InteractionDataset& ds, double cap);
};

/// d x d summaries of the embedding matrices, versioned against the model
/// they were computed from.
struct GramCache {
  Eigen::MatrixXd user_scatter;    // sum_u p_u p_u^T
  Eigen::MatrixXd item_scatter_w;  // sum_v w0_v q_v q_v^T
  std::uint64_t version = std::numeric_limits<std::uint64_t>::max();
};

/// One-layer neural matrix factorization state: user embeddings P (m x d),
/// item embeddings Q (n x d) and the prediction layer h (d). The score of a
/// pair is h . (p_u * q_v) with * elementwise.
///
/// Reads are safe under concurrency; any mutable access bumps the version
/// counter and invalidates the Gram cache. Callers running parallel row
/// updates should take mutable_P()/mutable_Q() once and hand out disjoint
/// rows to workers.
class ModelState {
 public:
  ModelState() = default;
  ModelState(RowMatrixXd P, RowMatrixXd Q, Eigen::VectorXd h, WeightScheme weights,
             double lambda, std::uint64_t init_seed = 0);

  /// Entries i.i.d. N(0, 0.01^2); h starts at all-ones so the initial model
  /// is a plain inner-product factorization.
  static ModelState random_init(int num_users, int num_items, int dim,
                                const WeightScheme& weights, double lambda,
                                std::uint64_t seed);

  int num_users() const { return static_cast<int>(P_.rows()); }
  int num_items() const { return static_cast<int>(Q_.rows()); }
  int dim() const { return static_cast<int>(h_.size()); }

  const RowMatrixXd& P() const { return P_; }
  const RowMatrixXd& Q() const { return Q_; }
  const Eigen::VectorXd& h() const { return h_; }
  const WeightScheme& weights() const { return weights_; }
  double lambda() const { return lambda_; }
  std::uint64_t init_seed() const { return init_seed_; }
  std::uint64_t version() const { return version_; }

  RowMatrixXd& mutable_P() { ++version_; return P_; }
  RowMatrixXd& mutable_Q() { ++version_; return Q_; }
  Eigen::VectorXd& mutable_h() { ++version_; return h_; }
  WeightScheme& mutable_weights() { ++version_; return weights_; }

  /// Score of one user/item pair. Throws std::out_of_range on bad indices.
  double predict(int u, int v) const;

  /// Scores of user u against every item: Q (h * p_u).
  Eigen::VectorXd scores_for_user(int u) const;

  /// Top-k items by score among items not in `exclude_sorted`, descending
  /// score with ties broken by ascending item index. Returns fewer than k
  /// when the candidate pool is smaller.
  std::vector<int> predict_topk(int u, int k, const std::vector<int>& exclude_sorted) const;

  void refresh_gram_cache();
  bool cache_fresh() const { return cache_.version == version_; }
  /// Throws StaleCacheError when the cache predates the last mutation.
  const GramCache& gram_cache() const;

  /// Shape/finiteness checks against a dataset. Throws DataError.
  void check_bound_to(const InteractionDataset& ds) const;

 private:
  RowMatrixXd P_, Q_;
  Eigen::VectorXd h_;
  WeightScheme weights_;
  double lambda_ = 1e-2;
  std::uint64_t init_seed_ = 0;
  std::uint64_t version_ = 0;
  GramCache cache_;
};

/// Exact weighted squared loss summed over every (u, v) cell, plus the L2
/// term. O(m n d) reference implementation.
double loss_naive(const ModelState& model, const InteractionDataset& ds);

/// Same value as loss_naive computed via the non-sampling rearrangement:
/// observed-entry corrections plus a d x d Gram term. O(|D| d + (m+n) d^2).
double loss_efficient(const ModelState& model, const InteractionDataset& ds);

/// Analytic block gradients of the non-sampling loss. All three require a
/// fresh Gram cache (refresh_gram_cache) and throw StaleCacheError otherwise.
Eigen::VectorXd grad_user(const ModelState& model, const InteractionDataset& ds, int u);
Eigen::VectorXd grad_item(const ModelState& model, const InteractionDataset& ds, int v);
Eigen::VectorXd grad_h(const ModelState& model, const InteractionDataset& ds);

}  // namespace alteraser
