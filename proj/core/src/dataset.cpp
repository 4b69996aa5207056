#include "alteraser/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "alteraser/errors.hpp"
#include "alteraser/rng.hpp"

namespace alteraser {

namespace {

// round-half-up of n/2 in exact integer arithmetic
int half_round_up(int n) { return (n + 1) / 2; }

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool sorted_contains(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}

struct PairAccumulator {
  std::vector<std::string> user_ids, item_ids;
  std::unordered_map<std::string, int> user_index, item_index;
  std::vector<std::pair<int, int>> pairs;

  int intern(std::unordered_map<std::string, int>& index, std::vector<std::string>& ids,
             const std::string& key) {
    auto [it, inserted] = index.emplace(key, static_cast<int>(ids.size()));
    if (inserted) ids.push_back(key);
    return it->second;
  }

  void add(const std::string& user, const std::string& item) {
    const int u = intern(user_index, user_ids, user);
    const int v = intern(item_index, item_ids, item);
    pairs.emplace_back(u, v);
  }

  InteractionDataset finalize(const std::string& path) {
    if (pairs.empty()) throw DataError(path + ": no interactions found");
    InteractionDataset ds;
    ds.num_users = static_cast<int>(user_ids.size());
    ds.num_items = static_cast<int>(item_ids.size());
    ds.user_ids = std::move(user_ids);
    ds.item_ids = std::move(item_ids);
    ds.user_index = std::move(user_index);
    ds.item_index = std::move(item_index);
    ds.train_by_user.resize(ds.num_users);
    for (const auto& [u, v] : pairs) ds.train_by_user[u].push_back(v);
    for (auto& items : ds.train_by_user) {
      std::sort(items.begin(), items.end());
      items.erase(std::unique(items.begin(), items.end()), items.end());
    }
    ds.test_by_user.assign(ds.num_users, {});
    ds.rebuild_transpose();
    return ds;
  }
};

std::vector<std::string> split_on(const std::string& line, const std::string& sep) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const auto next = line.find(sep, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + sep.size();
  }
  return fields;
}

}  // namespace

std::size_t InteractionDataset::num_train_pairs() const {
  std::size_t n = 0;
  for (const auto& items : train_by_user) n += items.size();
  return n;
}

std::size_t InteractionDataset::num_test_pairs() const {
  std::size_t n = 0;
  for (const auto& items : test_by_user) n += items.size();
  return n;
}

bool InteractionDataset::has_train(int u, int v) const {
  if (u < 0 || u >= num_users) return false;
  return sorted_contains(train_by_user[u], v);
}

bool InteractionDataset::has_test(int u, int v) const {
  if (u < 0 || u >= num_users) return false;
  return sorted_contains(test_by_user[u], v);
}

std::vector<std::pair<int, int>> InteractionDataset::train_pairs() const {
  std::vector<std::pair<int, int>> out;
  out.reserve(num_train_pairs());
  for (int u = 0; u < num_users; ++u)
    for (int v : train_by_user[u]) out.emplace_back(u, v);
  return out;
}

void InteractionDataset::rebuild_transpose() {
  train_by_item.assign(num_items, {});
  for (int u = 0; u < num_users; ++u)
    for (int v : train_by_user[u]) train_by_item[v].push_back(u);
  // user loop runs in ascending order, so each item list is already sorted
}

void InteractionDataset::validate() const {
  if (static_cast<int>(train_by_user.size()) != num_users ||
      static_cast<int>(test_by_user.size()) != num_users ||
      static_cast<int>(train_by_item.size()) != num_items)
    throw DataError("dataset: adjacency sizes inconsistent with (m, n)");
  auto check_lists = [this](const std::vector<std::vector<int>>& lists, int bound,
                            const char* what) {
    for (const auto& list : lists) {
      for (std::size_t i = 0; i < list.size(); ++i) {
        if (list[i] < 0 || list[i] >= bound)
          throw DataError(std::string("dataset: ") + what + " index out of range");
        if (i > 0 && list[i] <= list[i - 1])
          throw DataError(std::string("dataset: ") + what + " list not sorted/unique");
      }
    }
  };
  check_lists(train_by_user, num_items, "train item");
  check_lists(test_by_user, num_items, "test item");
  check_lists(train_by_item, num_users, "train user");
  // transpose round trip
  std::size_t transported = 0;
  for (int v = 0; v < num_items; ++v) {
    for (int u : train_by_item[v]) {
      if (!sorted_contains(train_by_user[u], v))
        throw DataError("dataset: by_item is not the transpose of by_user");
      ++transported;
    }
  }
  if (transported != num_train_pairs())
    throw DataError("dataset: by_item/by_user pair counts differ");
  for (int u = 0; u < num_users; ++u) {
    for (int v : test_by_user[u]) {
      if (sorted_contains(train_by_user[u], v))
        throw DataError("dataset: pair present in both train and test");
    }
  }
}

InteractionDataset load_movielens(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  PairAccumulator acc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split_on(line, "::");
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": malformed line");
    acc.add(fields[0], fields[1]);
  }
  return acc.finalize(path);
}

InteractionDataset load_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  PairAccumulator acc;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto fields = split_on(line, "\t");
    if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
      throw DataError(path + ":" + std::to_string(lineno) + ": expected user<TAB>item");
    acc.add(fields[0], fields[1]);
  }
  return acc.finalize(path);
}

InteractionDataset split_per_user(const InteractionDataset& ds, double train_fraction,
                                  std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw DataError("split_per_user: train_fraction must be in (0, 1)");
  InteractionDataset out = ds;
  rng::Engine eng(seed);
  for (int u = 0; u < ds.num_users; ++u) {
    std::vector<int> items;
    items.reserve(ds.train_by_user[u].size() + ds.test_by_user[u].size());
    items.insert(items.end(), ds.train_by_user[u].begin(), ds.train_by_user[u].end());
    items.insert(items.end(), ds.test_by_user[u].begin(), ds.test_by_user[u].end());
    std::sort(items.begin(), items.end());
    const int n_i = static_cast<int>(items.size());
    if (n_i == 0) {
      out.train_by_user[u].clear();
      out.test_by_user[u].clear();
      continue;
    }
    int n_train = static_cast<int>(std::floor(train_fraction * n_i + 0.5));
    n_train = std::max(1, n_train);
    if (n_i >= 2) n_train = std::min(n_train, n_i - 1);
    rng::shuffle(items, eng);
    std::vector<int> train(items.begin(), items.begin() + n_train);
    std::vector<int> test(items.begin() + n_train, items.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
    out.train_by_user[u] = std::move(train);
    out.test_by_user[u] = std::move(test);
  }
  out.rebuild_transpose();
  return out;
}

namespace {

std::vector<int> eligible_forgetting_users(const InteractionDataset& ds) {
  std::vector<int> users;
  for (int u = 0; u < ds.num_users; ++u)
    if (ds.train_by_user[u].size() >= 2) users.push_back(u);
  return users;
}

std::vector<int> pick_forgetting_users(const InteractionDataset& ds, int num,
                                       rng::Engine& eng) {
  if (num < 0) throw DataError("num_forgetting_users must be >= 0");
  auto eligible = eligible_forgetting_users(ds);
  if (static_cast<int>(eligible.size()) < num)
    throw DataError("only " + std::to_string(eligible.size()) +
                    " users have >= 2 training pairs, need " + std::to_string(num));
  return rng::sample_without_replacement(std::move(eligible), num, eng);
}

}  // namespace

ForgetRequest gen_forget_privacy(const InteractionDataset& ds, int num_forgetting_users,
                                 std::uint64_t seed) {
  rng::Engine eng(seed);
  ForgetRequest req;
  req.scenario = ForgetScenario::privacy;
  req.seed = seed;
  req.forgetting_users = pick_forgetting_users(ds, num_forgetting_users, eng);
  for (int u : req.forgetting_users) {
    const auto& items = ds.train_by_user[u];
    const int k = half_round_up(static_cast<int>(items.size()));
    for (int v : rng::sample_without_replacement(items, k, eng)) req.pairs.emplace_back(u, v);
  }
  return req;
}

std::pair<InteractionDataset, ForgetRequest> inject_noise_and_gen_forget(
    const InteractionDataset& ds, int num_forgetting_users, std::uint64_t seed) {
  rng::Engine eng(seed);
  ForgetRequest req;
  req.scenario = ForgetScenario::noise;
  req.seed = seed;
  req.forgetting_users = pick_forgetting_users(ds, num_forgetting_users, eng);
  InteractionDataset out = ds;
  for (int u : req.forgetting_users) {
    const auto& train = ds.train_by_user[u];
    const auto& test = ds.test_by_user[u];
    const int k = half_round_up(static_cast<int>(train.size()));
    std::vector<int> candidates;
    candidates.reserve(ds.num_items - train.size() - test.size());
    for (int v = 0; v < ds.num_items; ++v) {
      if (!sorted_contains(train, v) && !sorted_contains(test, v)) candidates.push_back(v);
    }
    if (static_cast<int>(candidates.size()) < k)
      throw DataError("user " + ds.user_ids[u] + ": only " +
                      std::to_string(candidates.size()) +
                      " unobserved items available, need " + std::to_string(k));
    const auto injected = rng::sample_without_replacement(std::move(candidates), k, eng);
    auto& row = out.train_by_user[u];
    row.insert(row.end(), injected.begin(), injected.end());
    std::sort(row.begin(), row.end());
    for (int v : injected) req.pairs.emplace_back(u, v);
  }
  out.rebuild_transpose();
  return {std::move(out), std::move(req)};
}

InteractionDataset apply_forget(const InteractionDataset& ds, const ForgetRequest& req) {
  for (const auto& [u, v] : req.pairs) {
    if (!ds.has_train(u, v))
      throw DataError("apply_forget: pair (" + std::to_string(u) + ", " + std::to_string(v) +
                      ") is not in the training set");
  }
  InteractionDataset out = ds;
  for (const auto& [u, v] : req.pairs) {
    auto& row = out.train_by_user[u];
    row.erase(std::lower_bound(row.begin(), row.end(), v));
  }
  out.rebuild_transpose();
  return out;
}

void save_forget_request(const ForgetRequest& req, const InteractionDataset& ds,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << "# scenario=" << (req.scenario == ForgetScenario::privacy ? "privacy" : "noise")
      << "\n";
  out << "# seed=" << req.seed << "\n";
  for (const auto& [u, v] : req.pairs) out << ds.user_ids[u] << "\t" << ds.item_ids[v] << "\n";
  if (!out) throw DataError(path + ": write failed");
}

ForgetRequest load_forget_request(const std::string& path, const InteractionDataset& ds) {
  std::ifstream in(path);
  if (!in) throw DataError(path + ": cannot open");
  ForgetRequest req;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto body = trim(line.substr(1));
      if (body.rfind("scenario=", 0) == 0) {
        const auto value = body.substr(9);
        if (value == "privacy")
          req.scenario = ForgetScenario::privacy;
        else if (value == "noise")
          req.scenario = ForgetScenario::noise;
        else
          throw DataError(path + ":" + std::to_string(lineno) + ": unknown scenario '" +
                          value + "'");
      } else if (body.rfind("seed=", 0) == 0) {
        try {
          req.seed = std::stoull(body.substr(5));
        } catch (const std::exception&) {
          throw DataError(path + ":" + std::to_string(lineno) + ": bad seed");
        }
      }
      continue;
    }
    const auto fields = split_on(line, "\t");
    if (fields.size() < 2)
      throw DataError(path + ":" + std::to_string(lineno) + ": expected user<TAB>item");
    const auto uit = ds.user_index.find(fields[0]);
    const auto vit = ds.item_index.find(fields[1]);
    if (uit == ds.user_index.end())
      throw DataError(path + ":" + std::to_string(lineno) + ": unknown user id '" +
                      fields[0] + "'");
    if (vit == ds.item_index.end())
      throw DataError(path + ":" + std::to_string(lineno) + ": unknown item id '" +
                      fields[1] + "'");
    req.pairs.emplace_back(uit->second, vit->second);
  }
  std::sort(req.pairs.begin(), req.pairs.end());
  req.pairs.erase(std::unique(req.pairs.begin(), req.pairs.end()), req.pairs.end());
  for (const auto& [u, v] : req.pairs) {
    if (req.forgetting_users.empty() || req.forgetting_users.back() != u)
      req.forgetting_users.push_back(u);
  }
  return req;
}

}  // namespace alteraser
