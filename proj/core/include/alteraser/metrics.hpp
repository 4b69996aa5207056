#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "alteraser/dataset.hpp"
#include "alteraser/model.hpp"

namespace alteraser {

/// Mean raw score over the given pairs ("re-predict score"); high values on
/// forgotten pairs indicate retained memory. No clamping.
double repredict_score(const ModelState& model, const std::vector<std::pair<int, int>>& pairs);

enum class RboVariant { min, extrapolated };

/// Rank-biased overlap between two duplicate-free ranked lists, evaluated to
/// depth min(k, shorter length). The min variant is the truncated prefix sum
/// (a strict lower bound); the extrapolated variant assumes the depth-k
/// agreement persists and equals 1 for identical lists. Symmetric, in [0,1].
double rbo(const std::vector<int>& list_a, const std::vector<int>& list_b, double p, int k,
           RboVariant variant);

/// Recall@k / NDCG@k for one user, with the user's training positives
/// excluded from the candidate pool. NDCG uses binary gains, discount
/// 1/log2(rank+1) and an ideal DCG over min(k, |test_u|) positives.
double recall_at_k(const ModelState& model, const InteractionDataset& ds, int u, int k);
double ndcg_at_k(const ModelState& model, const InteractionDataset& ds, int u, int k);

/// Per-user-averaged RBO between the top-k lists of two models over the
/// given users, for each requested k. Candidates exclude each user's
/// training positives in `ds` (pass the remaining dataset so that forgotten
/// items stay in the pool).
std::map<int, double> consistency_report(const ModelState& model_u, const ModelState& gold,
                                         const std::vector<int>& users,
                                         const InteractionDataset& ds,
                                         const std::vector<int>& ks, double p,
                                         RboVariant variant);

/// Mean recall/ndcg over the given users, skipping users without test
/// positives. Returned as {k -> (recall, ndcg)}.
std::map<int, std::pair<double, double>> accuracy_report(const ModelState& model,
                                                         const InteractionDataset& ds,
                                                         const std::vector<int>& users,
                                                         const std::vector<int>& ks);

/// Ratio of retraining time to unlearning time.
double speedup(double retrain_seconds, double unlearn_seconds);

enum class UserScope { forgetting_users, all_users };

/// One method's consistency/accuracy/efficiency numbers. Unset metrics are
/// NaN and serialize as empty cells.
struct EvalReport {
  std::string method_name;
  UserScope user_scope = UserScope::forgetting_users;
  double repredict = std::numeric_limits<double>::quiet_NaN();
  std::map<int, double> rbo_at;
  std::map<int, double> recall_at;
  std::map<int, double> ndcg_at;
  double runtime_seconds = std::numeric_limits<double>::quiet_NaN();
  double speedup_vs_retrain = std::numeric_limits<double>::quiet_NaN();
};

/// CSV with one row per (method, user_scope); ks taken from the union of
/// the reports' maps. Timing lives in the trailing two columns.
void write_reports_csv(const std::vector<EvalReport>& reports, const std::string& path);

/// Markdown tables: consistency, accuracy, efficiency.
std::string reports_markdown(const std::vector<EvalReport>& reports);

}  // namespace alteraser
