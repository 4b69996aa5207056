#include "alteraser/subproblem.hpp"

#include <Eigen/Cholesky>
#include <cmath>

#include "alteraser/errors.hpp"

namespace alteraser {

SubproblemSpec SubproblemSpec::make(RowMatrixXd design, Eigen::VectorXd observed_weights,
                                    Eigen::MatrixXd gram, double lambda, int block_id,
                                    bool check_gram) {
  if (design.rows() != observed_weights.size())
    throw DataError("subproblem: design rows and weights disagree");
  if (design.rows() > 0 && design.cols() != gram.rows())
    throw DataError("subproblem: design and gram dims disagree");
  if (gram.rows() != gram.cols()) throw DataError("subproblem: gram is not square");
  if (!(lambda > 0.0)) throw DataError("subproblem: lambda must be > 0");
  if (check_gram) {
    const double scale = 1.0 + gram.cwiseAbs().maxCoeff();
    if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-8 * scale)
      throw DataError("subproblem: gram is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(
        gram + 1e-8 * scale * Eigen::MatrixXd::Identity(gram.rows(), gram.cols()));
    if (llt.info() != Eigen::Success)
      throw DataError("subproblem: gram is not positive semidefinite");
  }
  SubproblemSpec spec;
  spec.rhs = design.rows() > 0 ? Eigen::VectorXd(design.colwise().sum().transpose())
                               : Eigen::VectorXd::Zero(gram.rows());
  spec.design = std::move(design);
  spec.observed_weights = std::move(observed_weights);
  spec.gram = std::move(gram);
  spec.lambda = lambda;
  spec.block_id = block_id;
  return spec;
}

Eigen::MatrixXd SubproblemSpec::dense_hessian() const {
  const int d = dim();
  Eigen::MatrixXd H = gram + lambda * Eigen::MatrixXd::Identity(d, d);
  if (design.rows() > 0)
    H.noalias() += design.transpose() * observed_weights.asDiagonal() * design;
  return H;
}

Eigen::MatrixXd build_gram(const RowMatrixXd& fixed_side, const Eigen::VectorXd& h,
                           const Eigen::VectorXd& row_weights) {
  if (fixed_side.rows() != row_weights.size())
    throw DataError("build_gram: rows and weights disagree");
  if (fixed_side.cols() != h.size()) throw DataError("build_gram: dims disagree with h");
  // diag(h) (M^T diag(w) M) diag(h)
  Eigen::MatrixXd scatter =
      fixed_side.transpose() * row_weights.asDiagonal() * fixed_side;
  return h.asDiagonal() * scatter * h.asDiagonal();
}

Eigen::VectorXd hvp(const SubproblemSpec& spec, const Eigen::VectorXd& x) {
  Eigen::VectorXd out = spec.gram * x + spec.lambda * x;
  if (spec.design.rows() > 0) {
    const Eigen::VectorXd t = spec.design * x;
    out.noalias() += spec.design.transpose() * spec.observed_weights.cwiseProduct(t);
  }
  return out;
}

double block_objective(const SubproblemSpec& spec, const Eigen::VectorXd& x) {
  double quad = x.dot(spec.gram * x) + spec.lambda * x.squaredNorm();
  if (spec.design.rows() > 0) {
    const Eigen::VectorXd t = spec.design * x;
    quad += t.dot(spec.observed_weights.cwiseProduct(t));
  }
  return 0.5 * quad - spec.rhs.dot(x);
}

Eigen::VectorXd block_gradient(const SubproblemSpec& spec, const Eigen::VectorXd& x) {
  return hvp(spec, x) - spec.rhs;
}

Eigen::VectorXd ah_newton_solve(const SubproblemSpec& spec) {
  Eigen::MatrixXd H = spec.dense_hessian();
  Eigen::LLT<Eigen::MatrixXd> llt(H);
  if (llt.info() != Eigen::Success) {
    // borderline conditioning: one shifted retry
    const double shift = 1e-10 * H.trace() / spec.dim();
    H.diagonal().array() += shift;
    llt.compute(H);
    if (llt.info() != Eigen::Success)
      throw NumericalError("ah_newton_solve: Hessian not positive definite (block " +
                           std::to_string(spec.block_id) + ")");
  }
  return llt.solve(spec.rhs);
}

namespace {

/// CG for (H + mu I) y = b from y = 0, to relative residual tol or max iters.
Eigen::VectorXd cg_solve(const SubproblemSpec& spec, double mu, const Eigen::VectorXd& b,
                         double tol, int max_iters) {
  const int d = spec.dim();
  Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd r = b;  // b - A*0
  Eigen::VectorXd p = r;
  double rs = r.squaredNorm();
  const double b_norm = b.norm();
  if (b_norm == 0.0) return y;
  const double stop = tol * b_norm;
  for (int it = 0; it < max_iters && std::sqrt(rs) > stop; ++it) {
    const Eigen::VectorXd Ap = hvp(spec, p) + mu * p;
    const double pAp = p.dot(Ap);
    if (pAp <= 0.0) break;  // numerical breakdown; return best iterate
    const double alpha = rs / pAp;
    y += alpha * p;
    r -= alpha * Ap;
    const double rs_next = r.squaredNorm();
    p = r + (rs_next / rs) * p;
    rs = rs_next;
  }
  return y;
}

}  // namespace

HFResult hf_newton_solve(const SubproblemSpec& spec, const Eigen::VectorXd& warm,
                         const HFConfig& cfg) {
  const int d = spec.dim();
  const int cg_iters = cfg.cg_max_iters > 0 ? cfg.cg_max_iters : 2 * d;
  const double grad_tol = 1e-8 * (1.0 + spec.rhs.norm());

  HFResult res;
  res.x = warm;
  double mu = cfg.damping_init;
  Eigen::VectorXd g = block_gradient(spec, res.x);

  for (int outer = 0; outer < cfg.max_outer_iters; ++outer) {
    res.grad_norm = g.norm();
    if (res.grad_norm < grad_tol) {
      res.converged = true;
      res.outer_iters = outer;
      return res;
    }
    const Eigen::VectorXd step = cg_solve(spec, mu, -g, cfg.cg_tol, cg_iters);
    const double gs = g.dot(step);
    const double f0 = block_objective(spec, res.x);

    double alpha = 1.0;
    double f1 = f0;
    bool accepted = false;
    for (int trial = 0; trial < cfg.max_backtracks; ++trial) {
      f1 = block_objective(spec, res.x + alpha * step);
      if (f1 <= f0 + cfg.armijo_c * alpha * gs) {
        accepted = true;
        break;
      }
      alpha *= cfg.backtrack_shrink;
    }
    if (!accepted) {
      res.stalled = true;
      res.outer_iters = outer;
      return res;
    }

    // Levenberg-Marquardt: compare achieved reduction with the undamped
    // quadratic model's prediction at the accepted step length.
    const double predicted = -(alpha * gs + 0.5 * alpha * alpha * step.dot(hvp(spec, step)));
    const double actual = f0 - f1;
    if (predicted > 0.0) {
      const double ratio = actual / predicted;
      if (ratio > 0.75)
        mu *= cfg.damping_down;
      else if (ratio < 0.25)
        mu *= cfg.damping_up;
    }

    res.x += alpha * step;
    g = block_gradient(spec, res.x);
    res.outer_iters = outer + 1;
  }
  res.grad_norm = g.norm();
  res.converged = res.grad_norm < grad_tol;
  return res;
}

}  // namespace alteraser
