#include <doctest.h>

#include <algorithm>

#include "alteraser/erase.hpp"
#include "alteraser/errors.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace alteraser;

namespace {

std::vector<int> iota_vec(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

}  // namespace

TEST_CASE("stopping_check follows the relative-improvement rule and the pass cap") {
  UnlearnConfig cfg;
  cfg.rel_loss_tol = 1e-4;
  cfg.max_full_passes = 5;
  CHECK(stopping_check({100.0, 100.0}, cfg));
  CHECK_FALSE(stopping_check({100.0, 50.0}, cfg));
  CHECK_FALSE(stopping_check({100.0}, cfg));
  cfg.max_full_passes = 1;
  CHECK(stopping_check({100.0, 50.0}, cfg));  // one full pass done, cap reached
  cfg.max_full_passes = 0;
  CHECK(stopping_check({100.0}, cfg));
}

TEST_CASE("alt_erase with an empty forget set and zero full passes changes nothing") {
  const auto ds = split_per_user(synth::random_dataset(12, 15, 6, 3), 0.8, 1);
  const auto model = synth::random_model(12, 15, 4, WeightScheme::uniform(0.05), 1e-2, 9);
  UnlearnConfig cfg;
  cfg.max_full_passes = 0;
  auto [out, log] = alt_erase(ds, ForgetRequest{}, model, cfg);
  CHECK(out.P() == model.P());
  CHECK(out.Q() == model.Q());
  CHECK(out.h() == model.h());
  CHECK(loss_efficient(out, ds) == loss_efficient(model, ds));
  CHECK(log.entries.size() == 1);  // just the (empty) targeted pass
}

TEST_CASE("one_erase_pass over everything equals one textbook weighted ALS sweep") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const int m = 20 + static_cast<int>(seed) * 9;  // up to 47
    const int n = 25 + static_cast<int>(seed) * 7;
    const int d = 3 + static_cast<int>(seed % 3) * 2;
    const auto ds = split_per_user(synth::random_dataset(m, n, 8, seed + 5), 0.8, seed);
    const WeightScheme weights = seed % 2 == 0 ? WeightScheme::uniform(0.12)
                                               : WeightScheme::item_popularity(ds, 0.2);
    auto model = synth::random_model(m, n, d, weights, 0.05, seed + 50);

    RowMatrixXd P_ref = model.P();
    RowMatrixXd Q_ref = model.Q();
    const Eigen::VectorXd w0 = weights.weight_vector(n);
    oracle::wals_sweep(ds, P_ref, Q_ref, model.h(), w0, model.lambda());

    UnlearnConfig cfg;  // ah_newton inner solver
    one_erase_pass(iota_vec(m), iota_vec(n), ds, model, cfg);

    CHECK((model.P() - P_ref).norm() <= 1e-8 * (1.0 + P_ref.norm()));
    CHECK((model.Q() - Q_ref).norm() <= 1e-8 * (1.0 + Q_ref.norm()));
  }
}

TEST_CASE("a user with no remaining interactions is ridge-shrunk to zero") {
  auto ds = split_per_user(synth::random_dataset(10, 12, 5, 8), 0.8, 2);
  ds.train_by_user[3].clear();
  ds.rebuild_transpose();
  auto model = synth::random_model(10, 12, 4, WeightScheme::uniform(0.0), 0.5, 3);
  UnlearnConfig cfg;
  one_erase_pass({3}, {}, ds, model, cfg);
  CHECK(model.P().row(3).norm() == 0.0);  // H^{-1} 0 with w0 = 0
}

TEST_CASE("loss on remaining data never increases across ah_newton passes") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto ds = split_per_user(synth::random_dataset(15, 18, 6, seed + 30), 0.8, seed);
    const auto model =
        synth::random_model(15, 18, 4, WeightScheme::uniform(0.08), 1e-2, seed + 70);
    const auto req = gen_forget_privacy(ds, 4, seed);
    UnlearnConfig cfg;
    cfg.max_full_passes = 4;
    cfg.rel_loss_tol = 1e-12;  // force several passes
    auto [out, log] = alt_erase(ds, req, model, cfg);
    REQUIRE(log.entries.size() >= 2);
    const auto remaining = apply_forget(ds, req);
    double prev = loss_efficient(model, remaining);
    for (const auto& entry : log.entries) {
      CHECK(entry.loss_after <= prev + 1e-10 * std::abs(prev));
      prev = entry.loss_after;
    }
  }
}

TEST_CASE("alt_erase leaves h and untouched embedding rows bitwise unchanged") {
  const auto ds = split_per_user(synth::random_dataset(20, 24, 6, 11), 0.8, 4);
  const auto model = synth::random_model(20, 24, 5, WeightScheme::uniform(0.05), 1e-2, 12);
  const auto req = gen_forget_privacy(ds, 3, 17);
  UnlearnConfig cfg;
  cfg.max_full_passes = 0;  // only the targeted pass runs
  auto [out, log] = alt_erase(ds, req, model, cfg);
  CHECK(out.h() == model.h());
  const auto touched_users = req.forgetting_users;
  std::vector<int> touched_items;
  for (const auto& [u, v] : req.pairs) touched_items.push_back(v);
  std::sort(touched_items.begin(), touched_items.end());
  for (int u = 0; u < 20; ++u) {
    if (!std::binary_search(touched_users.begin(), touched_users.end(), u))
      CHECK(out.P().row(u) == model.P().row(u));
  }
  for (int v = 0; v < 24; ++v) {
    if (!std::binary_search(touched_items.begin(), touched_items.end(), v))
      CHECK(out.Q().row(v) == model.Q().row(v));
  }
}

TEST_CASE("block order within a phase does not change the result") {
  const auto ds = split_per_user(synth::random_dataset(14, 16, 5, 21), 0.8, 6);
  auto model_a = synth::random_model(14, 16, 4, WeightScheme::uniform(0.07), 1e-2, 22);
  auto model_b = model_a;
  UnlearnConfig cfg;
  std::vector<int> users = iota_vec(14), items = iota_vec(16);
  one_erase_pass(users, items, ds, model_a, cfg);
  std::reverse(users.begin(), users.end());
  std::reverse(items.begin(), items.end());
  one_erase_pass(users, items, ds, model_b, cfg);
  CHECK(model_a.P() == model_b.P());
  CHECK(model_a.Q() == model_b.Q());
}

TEST_CASE("worker count does not change alt_erase results") {
  const auto ds = split_per_user(synth::random_dataset(25, 30, 7, 31), 0.8, 7);
  const auto model = synth::random_model(25, 30, 6, WeightScheme::uniform(0.05), 1e-2, 32);
  const auto req = gen_forget_privacy(ds, 5, 41);
  for (InnerSolver solver :
       {InnerSolver::ah_newton, InnerSolver::hf_newton, InnerSolver::first_order}) {
    UnlearnConfig cfg;
    cfg.inner_solver = solver;
    cfg.first_order_steps = 10;
    cfg.parallel_workers = 1;
    auto [a, log_a] = alt_erase(ds, req, model, cfg);
    cfg.parallel_workers = 4;
    auto [b, log_b] = alt_erase(ds, req, model, cfg);
    CHECK(a.P() == b.P());
    CHECK(a.Q() == b.Q());
  }
}

TEST_CASE("hf_newton and first_order inner solvers also reduce the loss") {
  const auto ds = split_per_user(synth::random_dataset(16, 20, 6, 51), 0.8, 8);
  const auto model = synth::random_model(16, 20, 4, WeightScheme::uniform(0.06), 1e-2, 52);
  const auto req = gen_forget_privacy(ds, 4, 61);
  const auto remaining = apply_forget(ds, req);
  const double before = loss_efficient(model, remaining);
  for (InnerSolver solver : {InnerSolver::hf_newton, InnerSolver::first_order}) {
    UnlearnConfig cfg;
    cfg.inner_solver = solver;
    cfg.first_order_steps = 150;
    cfg.first_order.learning_rate = 0.02;
    cfg.first_order.weight_decay = 0.0;
    auto [out, log] = alt_erase(ds, req, model, cfg);
    CHECK(loss_efficient(out, remaining) < before);
  }
}
