#pragma once

// Independent reference implementations used as test oracles. Everything
// here is written as plain loops (or a different solver path) on purpose:
// these must not share code with the implementations they check.

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <set>
#include <vector>

#include "alteraser/dataset.hpp"
#include "alteraser/model.hpp"
#include "alteraser/subproblem.hpp"

namespace oracle {

using alteraser::InteractionDataset;
using alteraser::ModelState;
using alteraser::RowMatrixXd;
using alteraser::SubproblemSpec;

/// Three-factor score by direct elementwise summation.
inline double predict(const ModelState& m, int u, int v) {
  double s = 0.0;
  for (int a = 0; a < m.dim(); ++a) s += m.h()[a] * m.P()(u, a) * m.Q()(v, a);
  return s;
}

/// Full argsort of a user's scores (descending, ties by ascending index),
/// excluded items removed, first k taken.
inline std::vector<int> topk(const ModelState& m, int u, int k,
                             const std::vector<int>& exclude) {
  std::vector<std::pair<double, int>> scored;
  for (int v = 0; v < m.num_items(); ++v) {
    if (std::find(exclude.begin(), exclude.end(), v) == exclude.end())
      scored.emplace_back(predict(m, u, v), v);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& x, const auto& y) {
    if (x.first != y.first) return x.first > y.first;
    return x.second < y.second;
  });
  std::vector<int> out;
  for (std::size_t i = 0; i < scored.size() && static_cast<int>(i) < k; ++i)
    out.push_back(scored[i].second);
  return out;
}

/// Central finite difference of fn at +/- step along one coordinate.
template <typename Fn>
double central_difference(Fn&& fn, double& coord, double step) {
  const double saved = coord;
  coord = saved + step;
  const double up = fn();
  coord = saved - step;
  const double down = fn();
  coord = saved;
  return (up - down) / (2.0 * step);
}

/// Explicit dense Hessian of a block subproblem, assembled entrywise.
inline Eigen::MatrixXd dense_hessian(const SubproblemSpec& spec) {
  const int d = spec.dim();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      double s = 0.0;
      for (Eigen::Index r = 0; r < spec.design.rows(); ++r)
        s += spec.observed_weights[r] * spec.design(r, i) * spec.design(r, j);
      H(i, j) = s + spec.gram(i, j) + (i == j ? spec.lambda : 0.0);
    }
  }
  return H;
}

/// Normal-equations solve through a different factorization path (LU).
inline Eigen::VectorXd dense_solve(const SubproblemSpec& spec) {
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(spec.dim());
  for (Eigen::Index r = 0; r < spec.design.rows(); ++r)
    rhs += spec.design.row(r).transpose();
  return dense_hessian(spec).fullPivLu().solve(rhs);
}

/// Entrywise double-loop Gram: sum_r w_r (h*row_r)(h*row_r)^T.
inline Eigen::MatrixXd gram_double_loop(const RowMatrixXd& rows, const Eigen::VectorXd& h,
                                        const Eigen::VectorXd& w) {
  const int d = static_cast<int>(h.size());
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index r = 0; r < rows.rows(); ++r) {
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        G(i, j) += w[r] * (h[i] * rows(r, i)) * (h[j] * rows(r, j));
  }
  return G;
}

/// One sweep of textbook weighted alternating least squares on the
/// one-layer model: every user row solved against all items with weights
/// (1 observed, w0_v missing) and targets (1 observed, 0 missing), then
/// every item row against the updated users. Dense per-block normal
/// equations, LU solves.
inline void wals_sweep(const InteractionDataset& ds, RowMatrixXd& P, RowMatrixXd& Q,
                       const Eigen::VectorXd& h, const Eigen::VectorXd& w0, double lambda) {
  const int d = static_cast<int>(h.size());
  for (int u = 0; u < ds.num_users; ++u) {
    Eigen::MatrixXd H = lambda * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (int v = 0; v < ds.num_items; ++v) {
      const Eigen::VectorXd a = h.cwiseProduct(Q.row(v).transpose());
      const bool obs = ds.has_train(u, v);
      const double w = obs ? 1.0 : w0[v];
      H += w * a * a.transpose();
      if (obs) b += a;  // w * y with w = 1, y = 1
    }
    P.row(u) = H.fullPivLu().solve(b).transpose();
  }
  for (int v = 0; v < ds.num_items; ++v) {
    Eigen::MatrixXd H = lambda * Eigen::MatrixXd::Identity(d, d);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    for (int u = 0; u < ds.num_users; ++u) {
      const Eigen::VectorXd c = h.cwiseProduct(P.row(u).transpose());
      const bool obs = ds.has_train(u, v);
      const double w = obs ? 1.0 : w0[v];
      H += w * c * c.transpose();
      if (obs) b += c;
    }
    Q.row(v) = H.fullPivLu().solve(b).transpose();
  }
}

/// RBO by per-depth set intersection, summed directly.
inline double rbo_depth_sum(const std::vector<int>& a, const std::vector<int>& b, double p,
                            int k, bool extrapolate) {
  const int depth = std::min<int>({k, static_cast<int>(a.size()), static_cast<int>(b.size())});
  double acc = 0.0;
  double last_agreement = 0.0;
  for (int t = 1; t <= depth; ++t) {
    std::set<int> pa(a.begin(), a.begin() + t);
    std::set<int> pb(b.begin(), b.begin() + t);
    std::vector<int> inter;
    std::set_intersection(pa.begin(), pa.end(), pb.begin(), pb.end(),
                          std::back_inserter(inter));
    last_agreement = static_cast<double>(inter.size()) / t;
    acc += std::pow(p, t - 1) * last_agreement;
  }
  double value = (1.0 - p) * acc;
  if (extrapolate && depth > 0) value += last_agreement * std::pow(p, depth);
  return value;
}

}  // namespace oracle
