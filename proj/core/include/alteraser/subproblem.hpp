#pragma once

#include <Eigen/Core>

#include "alteraser/model.hpp"

namespace alteraser {

/// One block's ridge-regression data: the embedding of a single user (item
/// embeddings and h fixed) or a single item (user embeddings and h fixed).
/// The block objective is the strictly convex quadratic
///   f(x) = 1/2 x^T H x - rhs^T x,   H = design^T diag(w) design + gram + lambda I
/// whose unique minimizer is the exact block update.
struct SubproblemSpec {
  RowMatrixXd design;               // k x d observed design rows (h * fixed row)
  Eigen::VectorXd observed_weights;  // (1 - w0_v) per design row
  Eigen::MatrixXd gram;             // d x d all-entries Gram of the fixed side
  double lambda = 1e-2;
  Eigen::VectorXd rhs;              // sum of design rows (targets are 1)
  int block_id = -1;

  /// Computes rhs and optionally validates the Gram (symmetry and PSD to
  /// tolerance 1e-8). Solvers inside a pass share a pre-validated Gram and
  /// skip the check.
  static SubproblemSpec make(RowMatrixXd design, Eigen::VectorXd observed_weights,
                             Eigen::MatrixXd gram, double lambda, int block_id = -1,
                             bool check_gram = true);

  int dim() const { return static_cast<int>(gram.rows()); }

  /// Materializes H. O(k d^2).
  Eigen::MatrixXd dense_hessian() const;
};

/// G = sum_rows w_row (h * row)(h * row)^T for the given side. O(rows d^2).
Eigen::MatrixXd build_gram(const RowMatrixXd& fixed_side, const Eigen::VectorXd& h,
                           const Eigen::VectorXd& row_weights);

/// H x without materializing H. O(k d + d^2).
Eigen::VectorXd hvp(const SubproblemSpec& spec, const Eigen::VectorXd& x);

/// Block objective f(x) up to the x-independent constant.
double block_objective(const SubproblemSpec& spec, const Eigen::VectorXd& x);

/// Block gradient H x - rhs.
Eigen::VectorXd block_gradient(const SubproblemSpec& spec, const Eigen::VectorXd& x);

/// Exact block minimizer H^{-1} rhs via Cholesky of the hand-assembled
/// Hessian. Retries once with a tiny diagonal shift before failing with
/// NumericalError.
Eigen::VectorXd ah_newton_solve(const SubproblemSpec& spec);

struct HFConfig {
  double cg_tol = 1e-10;        // relative residual target
  int cg_max_iters = -1;        // <= 0 means 2 d
  double damping_init = 1e-4;   // Levenberg-Marquardt mu
  double damping_up = 10.0;
  double damping_down = 0.1;
  double armijo_c = 1e-4;
  double backtrack_shrink = 0.5;
  int max_backtracks = 20;
  int max_outer_iters = 5;
};

struct HFResult {
  Eigen::VectorXd x;
  bool converged = false;  // gradient norm below 1e-8 (1 + |rhs|)
  bool stalled = false;    // line search exhausted its trials
  int outer_iters = 0;
  double grad_norm = 0.0;
};

/// Hessian-free Newton on the block objective: conjugate-gradient solves of
/// the damped system (H + mu I) step = -grad, Armijo backtracking, and
/// damping adjusted by the actual/predicted reduction ratio. The objective
/// never increases across accepted steps.
HFResult hf_newton_solve(const SubproblemSpec& spec, const Eigen::VectorXd& warm,
                         const HFConfig& cfg);

}  // namespace alteraser
