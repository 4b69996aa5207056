#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "alteraser/dataset.hpp"
#include "alteraser/errors.hpp"
#include "support/synthetic.hpp"

using namespace alteraser;

namespace {

std::filesystem::path write_file(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("movielens loader collapses duplicates and indexes by first appearance") {
  const auto path =
      write_file("ml_dup.dat", "1::10::5::978300760\n1::10::3::978302109\n");
  const auto ds = load_movielens(path.string());
  CHECK(ds.num_users == 1);
  CHECK(ds.num_items == 1);
  CHECK(ds.num_train_pairs() == 1);
  CHECK(ds.user_ids[0] == "1");
  CHECK(ds.item_ids[0] == "10");
  ds.validate();
}

TEST_CASE("movielens loader reports malformed lines with their number") {
  const auto path = write_file("ml_bad.dat", "abc\n");
  CHECK_THROWS_WITH_AS(load_movielens(path.string()), doctest::Contains(":1:"), DataError);
}

TEST_CASE("movielens loader rejects empty files") {
  const auto path = write_file("ml_empty.dat", "");
  CHECK_THROWS_AS(load_movielens(path.string()), DataError);
}

TEST_CASE("tsv loader handles comments and multiple users") {
  const auto path = write_file("pairs.tsv", "# header\nu1\ti1\nu2\ti1\n");
  const auto ds = load_tsv(path.string());
  CHECK(ds.num_users == 2);
  CHECK(ds.num_items == 1);
  CHECK(ds.num_train_pairs() == 2);
}

TEST_CASE("tsv loader rejects single-column lines") {
  const auto path = write_file("pairs_bad.tsv", "justonecolumn\n");
  CHECK_THROWS_AS(load_tsv(path.string()), DataError);
}

TEST_CASE("split_per_user honors the exact per-user arithmetic") {
  auto ds = synth::random_dataset(3, 40, 10, 99);
  ds.train_by_user[1].resize(1);  // degenerate user with one interaction
  ds.rebuild_transpose();
  const auto split = split_per_user(ds, 0.8, 7);
  CHECK(split.train_by_user[0].size() == 8);
  CHECK(split.test_by_user[0].size() == 2);
  CHECK(split.train_by_user[1].size() == 1);
  CHECK(split.test_by_user[1].size() == 0);
  split.validate();

  // no pair invented, none lost
  for (int u = 0; u < 3; ++u) {
    std::vector<int> merged = split.train_by_user[u];
    merged.insert(merged.end(), split.test_by_user[u].begin(), split.test_by_user[u].end());
    std::sort(merged.begin(), merged.end());
    CHECK(merged == ds.train_by_user[u]);
  }
}

TEST_CASE("split_per_user is deterministic in the seed") {
  const auto ds = synth::random_dataset(20, 50, 12, 5);
  const auto a = split_per_user(ds, 0.8, 42);
  const auto b = split_per_user(ds, 0.8, 42);
  CHECK(a.train_by_user == b.train_by_user);
  CHECK(a.test_by_user == b.test_by_user);
  const auto c = split_per_user(ds, 0.8, 43);
  CHECK(a.train_by_user != c.train_by_user);
}

TEST_CASE("gen_forget_privacy samples the requested users and half their pairs") {
  const auto ds = split_per_user(synth::random_dataset(100, 80, 9, 3), 0.8, 1);
  const auto req = gen_forget_privacy(ds, 64, 11);
  CHECK(req.forgetting_users.size() == 64);
  CHECK(req.scenario == ForgetScenario::privacy);
  for (int u : req.forgetting_users) {
    const int n_i = static_cast<int>(ds.train_by_user[u].size());
    int count = 0;
    for (const auto& [ru, rv] : req.pairs) {
      if (ru == u) {
        CHECK(ds.has_train(ru, rv));
        ++count;
      }
    }
    CHECK(count == (n_i + 1) / 2);  // round half up
  }
}

TEST_CASE("gen_forget_privacy rounds 7/2 up to 4") {
  auto ds = synth::random_dataset(1, 30, 7, 21);
  const auto req = gen_forget_privacy(ds, 1, 2);
  CHECK(req.pairs.size() == 4);
}

TEST_CASE("gen_forget_privacy with zero users yields an empty request") {
  const auto ds = synth::random_dataset(5, 10, 4, 8);
  const auto req = gen_forget_privacy(ds, 0, 3);
  CHECK(req.pairs.empty());
  CHECK(req.forgetting_users.empty());
}

TEST_CASE("gen_forget_privacy fails when too few users are eligible") {
  const auto ds = synth::random_dataset(4, 10, 3, 8);
  CHECK_THROWS_AS(gen_forget_privacy(ds, 5, 1), DataError);
}

TEST_CASE("noise injection avoids train and test items and is invertible") {
  const auto ds = split_per_user(synth::random_dataset(30, 60, 10, 17), 0.8, 9);
  const auto [noisy, req] = inject_noise_and_gen_forget(ds, 6, 13);
  CHECK(req.scenario == ForgetScenario::noise);
  noisy.validate();
  for (const auto& [u, v] : req.pairs) {
    CHECK(!ds.has_train(u, v));
    CHECK(!ds.has_test(u, v));
    CHECK(noisy.has_train(u, v));
  }
  for (int u : req.forgetting_users) {
    const int before = static_cast<int>(ds.train_by_user[u].size());
    const int after = static_cast<int>(noisy.train_by_user[u].size());
    CHECK(after - before == (before + 1) / 2);
  }
  // removing the injected pairs restores the original training set exactly
  const auto restored = apply_forget(noisy, req);
  CHECK(restored.train_by_user == ds.train_by_user);
  CHECK(restored.train_by_item == ds.train_by_item);
  CHECK(restored.test_by_user == ds.test_by_user);

  const auto [noisy2, req2] = inject_noise_and_gen_forget(ds, 6, 13);
  CHECK(noisy2.train_by_user == noisy.train_by_user);
  CHECK(req2.pairs == req.pairs);
}

TEST_CASE("noise injection fails when a user lacks unobserved items") {
  // user 0 interacts with 8 of 10 items; needs 4 candidates but has 2
  auto ds = synth::random_dataset(2, 10, 8, 30);
  CHECK_THROWS_WITH_AS(inject_noise_and_gen_forget(ds, 2, 1), doctest::Contains("user"),
                       DataError);
}

TEST_CASE("apply_forget removes exactly the requested pairs") {
  const auto ds = synth::random_dataset(10, 25, 10, 4);
  ForgetRequest req;
  req.forgetting_users = {2};
  for (int i = 0; i < 7; ++i) req.pairs.emplace_back(2, ds.train_by_user[2][i]);
  const auto out = apply_forget(ds, req);
  CHECK(out.num_train_pairs() == 100 - 7);
  out.validate();

  SUBCASE("empty request is the identity") {
    const auto same = apply_forget(ds, ForgetRequest{});
    CHECK(same.train_by_user == ds.train_by_user);
  }
  SUBCASE("removing a full row keeps the user addressable") {
    ForgetRequest all;
    all.forgetting_users = {2};
    for (int v : ds.train_by_user[2]) all.pairs.emplace_back(2, v);
    const auto emptied = apply_forget(ds, all);
    CHECK(emptied.num_users == ds.num_users);
    CHECK(emptied.train_by_user[2].empty());
    emptied.validate();
  }
  SUBCASE("unknown pair is rejected") {
    ForgetRequest bad;
    bad.pairs.emplace_back(0, ds.train_by_user[1][0]);
    if (!ds.has_train(0, bad.pairs[0].second)) {
      CHECK_THROWS_AS(apply_forget(ds, bad), DataError);
    }
  }
}

TEST_CASE("forget request files round-trip through external ids") {
  const auto ds = split_per_user(synth::random_dataset(20, 40, 8, 77), 0.8, 2);
  const auto req = gen_forget_privacy(ds, 5, 99);
  const auto path = std::filesystem::temp_directory_path() / "req.tsv";
  save_forget_request(req, ds, path.string());
  const auto loaded = load_forget_request(path.string(), ds);
  CHECK(loaded.pairs == req.pairs);
  CHECK(loaded.forgetting_users == req.forgetting_users);
  CHECK(loaded.scenario == req.scenario);
  CHECK(loaded.seed == req.seed);
}

TEST_CASE("forget request loader rejects unknown ids") {
  const auto ds = synth::random_dataset(3, 5, 2, 1);
  const auto path = write_file("req_bad.tsv", "# scenario=privacy\nnobody\ti0\n");
  CHECK_THROWS_AS(load_forget_request(path.string(), ds), DataError);
}
