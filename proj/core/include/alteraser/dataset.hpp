#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace alteraser {

/// Implicit-feedback interaction data with dense user/item indices and an
/// optional per-user train/test split. The by-user and by-item adjacency
/// lists are exact transposes of each other; items inside each list are
/// sorted and duplicate-free.
struct InteractionDataset {
  int num_users = 0;
  int num_items = 0;
  std::vector<std::vector<int>> train_by_user;  // per user, sorted item indices
  std::vector<std::vector<int>> train_by_item;  // per item, sorted user indices
  std::vector<std::vector<int>> test_by_user;   // per user, sorted item indices
  std::vector<std::string> user_ids;            // dense index -> external id
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, int> user_index;  // external id -> dense index
  std::unordered_map<std::string, int> item_index;

  std::size_t num_train_pairs() const;
  std::size_t num_test_pairs() const;
  bool has_train(int u, int v) const;
  bool has_test(int u, int v) const;

  /// All training pairs in (user, item) ascending order.
  std::vector<std::pair<int, int>> train_pairs() const;

  /// Rebuilds train_by_item from train_by_user.
  void rebuild_transpose();

  /// Checks index ranges, sortedness, duplicates and the transpose identity.
  /// Throws DataError on violation.
  void validate() const;
};

enum class ForgetScenario { privacy, noise };

/// A deletion request: training pairs to erase, all belonging to the
/// designated forgetting users.
struct ForgetRequest {
  std::vector<std::pair<int, int>> pairs;  // sorted, unique, subset of train
  ForgetScenario scenario = ForgetScenario::privacy;
  std::vector<int> forgetting_users;  // sorted, unique
  std::uint64_t seed = 0;
};

/// Loads `UserID::MovieID::Rating::Timestamp` lines as implicit positives
/// (any rating counts; duplicates collapse). Dense indices follow first
/// appearance order. The result is unsplit: everything lands in train.
InteractionDataset load_movielens(const std::string& path);

/// Loads `user_id<TAB>item_id[<TAB>...]` lines; `#`-prefixed lines are
/// skipped. Same dedup/indexing contract as load_movielens.
InteractionDataset load_tsv(const std::string& path);

/// Moves round(train_fraction * n_i) of each user's interactions to train
/// and the rest to test (at least 1 in train; at least 1 in test when the
/// user has >= 2 interactions). Selection is uniform given the seed.
InteractionDataset split_per_user(const InteractionDataset& ds, double train_fraction,
                                  std::uint64_t seed);

/// Samples `num_forgetting_users` users (among those with >= 2 training
/// pairs) and, for each, round-half-up(n_i/2) of their training pairs.
ForgetRequest gen_forget_privacy(const InteractionDataset& ds, int num_forgetting_users,
                                 std::uint64_t seed);

/// Injects round-half-up(n_i/2) false positive interactions per selected
/// user, drawn from items absent from both their train and test sets.
/// Returns the polluted dataset and the request covering exactly the
/// injected pairs.
std::pair<InteractionDataset, ForgetRequest> inject_noise_and_gen_forget(
    const InteractionDataset& ds, int num_forgetting_users, std::uint64_t seed);

/// Removes req.pairs from the training set (test set untouched).
InteractionDataset apply_forget(const InteractionDataset& ds, const ForgetRequest& req);

/// Forget-request file: `# scenario=...`, `# seed=...`, then one
/// `external_user_id<TAB>external_item_id` line per pair.
void save_forget_request(const ForgetRequest& req, const InteractionDataset& ds,
                         const std::string& path);
ForgetRequest load_forget_request(const std::string& path, const InteractionDataset& ds);

}  // namespace alteraser
