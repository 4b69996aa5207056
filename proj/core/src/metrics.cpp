#include "alteraser/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "alteraser/errors.hpp"

namespace alteraser {

double repredict_score(const ModelState& model,
                       const std::vector<std::pair<int, int>>& pairs) {
  if (pairs.empty()) throw DataError("repredict_score: empty pair set");
  double acc = 0.0;
  for (const auto& [u, v] : pairs) acc += model.predict(u, v);
  return acc / static_cast<double>(pairs.size());
}

double rbo(const std::vector<int>& list_a, const std::vector<int>& list_b, double p, int k,
           RboVariant variant) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("rbo: p must lie in (0, 1)");
  if (k < 1) throw std::invalid_argument("rbo: k must be >= 1");
  const int depth = std::min<int>({k, static_cast<int>(list_a.size()),
                                   static_cast<int>(list_b.size())});
  std::set<int> seen_a, seen_b;
  int overlap = 0;
  double acc = 0.0;
  double weight = 1.0;  // p^{d-1}
  double agreement = 0.0;
  for (int d = 1; d <= depth; ++d) {
    const int xa = list_a[d - 1];
    const int xb = list_b[d - 1];
    if (!seen_a.insert(xa).second)
      throw std::invalid_argument("rbo: duplicate item in first list");
    if (!seen_b.insert(xb).second)
      throw std::invalid_argument("rbo: duplicate item in second list");
    if (xa == xb) {
      ++overlap;
    } else {
      if (seen_b.count(xa)) ++overlap;
      if (seen_a.count(xb)) ++overlap;
    }
    agreement = static_cast<double>(overlap) / d;
    acc += weight * agreement;
    weight *= p;
  }
  if (depth == 0) return 0.0;
  double value = (1.0 - p) * acc;
  if (variant == RboVariant::extrapolated) value += agreement * std::pow(p, depth);
  return value;
}

namespace {

std::vector<int> topk_for_user(const ModelState& model, const InteractionDataset& ds, int u,
                               int k) {
  return model.predict_topk(u, k, ds.train_by_user[u]);
}

}  // namespace

double recall_at_k(const ModelState& model, const InteractionDataset& ds, int u, int k) {
  const auto& test = ds.test_by_user[u];
  if (test.empty()) throw DataError("recall_at_k: user has no test positives");
  const auto topk = topk_for_user(model, ds, u, k);
  int hits = 0;
  for (int v : topk)
    if (std::binary_search(test.begin(), test.end(), v)) ++hits;
  return static_cast<double>(hits) / static_cast<double>(test.size());
}

double ndcg_at_k(const ModelState& model, const InteractionDataset& ds, int u, int k) {
  const auto& test = ds.test_by_user[u];
  if (test.empty()) throw DataError("ndcg_at_k: user has no test positives");
  const auto topk = topk_for_user(model, ds, u, k);
  double dcg = 0.0;
  for (std::size_t rank = 1; rank <= topk.size(); ++rank) {
    if (std::binary_search(test.begin(), test.end(), topk[rank - 1]))
      dcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  }
  const int ideal_hits = std::min<int>(k, static_cast<int>(test.size()));
  double idcg = 0.0;
  for (int rank = 1; rank <= ideal_hits; ++rank)
    idcg += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
  return dcg / idcg;
}

std::map<int, double> consistency_report(const ModelState& model_u, const ModelState& gold,
                                         const std::vector<int>& users,
                                         const InteractionDataset& ds,
                                         const std::vector<int>& ks, double p,
                                         RboVariant variant) {
  std::map<int, double> out;
  if (users.empty() || ks.empty()) return out;
  const int max_k = *std::max_element(ks.begin(), ks.end());
  for (int k : ks) out[k] = 0.0;
  for (int u : users) {
    const auto top_u = topk_for_user(model_u, ds, u, max_k);
    const auto top_g = topk_for_user(gold, ds, u, max_k);
    for (int k : ks) {
      const std::vector<int> prefix_u(top_u.begin(),
                                      top_u.begin() + std::min<std::size_t>(k, top_u.size()));
      const std::vector<int> prefix_g(top_g.begin(),
                                      top_g.begin() + std::min<std::size_t>(k, top_g.size()));
      out[k] += rbo(prefix_u, prefix_g, p, k, variant);
    }
  }
  for (int k : ks) out[k] /= static_cast<double>(users.size());
  return out;
}

std::map<int, std::pair<double, double>> accuracy_report(const ModelState& model,
                                                         const InteractionDataset& ds,
                                                         const std::vector<int>& users,
                                                         const std::vector<int>& ks) {
  std::map<int, std::pair<double, double>> out;
  for (int k : ks) out[k] = {0.0, 0.0};
  int counted = 0;
  for (int u : users) {
    if (ds.test_by_user[u].empty()) continue;
    ++counted;
    for (int k : ks) {
      out[k].first += recall_at_k(model, ds, u, k);
      out[k].second += ndcg_at_k(model, ds, u, k);
    }
  }
  if (counted > 0) {
    for (int k : ks) {
      out[k].first /= counted;
      out[k].second /= counted;
    }
  }
  return out;
}

double speedup(double retrain_seconds, double unlearn_seconds) {
  if (!(retrain_seconds > 0.0) || !(unlearn_seconds > 0.0))
    throw DataError("speedup: both runtimes must be > 0");
  return retrain_seconds / unlearn_seconds;
}

namespace {

std::string cell(double x, const char* fmt = "%.6f") {
  if (std::isnan(x)) return "";
  char buf[48];
  std::snprintf(buf, sizeof(buf), fmt, x);
  return buf;
}

std::string md_cell(double x, const char* fmt = "%.4f") {
  if (std::isnan(x)) return "-";
  char buf[48];
  std::snprintf(buf, sizeof(buf), fmt, x);
  return buf;
}

std::vector<int> collect_ks(const std::vector<EvalReport>& reports) {
  std::set<int> ks;
  for (const auto& r : reports) {
    for (const auto& [k, _] : r.rbo_at) ks.insert(k);
    for (const auto& [k, _] : r.recall_at) ks.insert(k);
    for (const auto& [k, _] : r.ndcg_at) ks.insert(k);
  }
  return {ks.begin(), ks.end()};
}

double map_get(const std::map<int, double>& m, int k) {
  const auto it = m.find(k);
  return it == m.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
}

const char* scope_name(UserScope s) {
  return s == UserScope::forgetting_users ? "forgetting_users" : "all_users";
}

}  // namespace

void write_reports_csv(const std::vector<EvalReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  const auto ks = collect_ks(reports);
  out << "method,user_scope,repredict_score";
  for (int k : ks) out << ",rbo@" << k;
  for (int k : ks) out << ",recall@" << k;
  for (int k : ks) out << ",ndcg@" << k;
  out << ",runtime_seconds,speedup_vs_retrain\n";
  for (const auto& r : reports) {
    out << r.method_name << "," << scope_name(r.user_scope) << "," << cell(r.repredict);
    for (int k : ks) out << "," << cell(map_get(r.rbo_at, k));
    for (int k : ks) out << "," << cell(map_get(r.recall_at, k));
    for (int k : ks) out << "," << cell(map_get(r.ndcg_at, k));
    out << "," << cell(r.runtime_seconds, "%.3f") << ","
        << cell(r.speedup_vs_retrain, "%.2f") << "\n";
  }
  if (!out) throw DataError(path + ": write failed");
}

std::string reports_markdown(const std::vector<EvalReport>& reports) {
  const auto ks = collect_ks(reports);
  std::ostringstream md;

  md << "## Consistency (forgetting thoroughness)\n\n";
  md << "| Method | Scope | Re-Predict Score |";
  for (int k : ks) md << " RBO@" << k << " |";
  md << "\n|---|---|---|";
  for (std::size_t i = 0; i < ks.size(); ++i) md << "---|";
  md << "\n";
  for (const auto& r : reports) {
    md << "| " << r.method_name << " | " << scope_name(r.user_scope) << " | "
       << md_cell(r.repredict) << " |";
    for (int k : ks) md << " " << md_cell(map_get(r.rbo_at, k)) << " |";
    md << "\n";
  }

  md << "\n## Accuracy (recommendation effectiveness)\n\n";
  md << "| Method | Scope |";
  for (int k : ks) md << " Recall@" << k << " |";
  for (int k : ks) md << " NDCG@" << k << " |";
  md << "\n|---|---|";
  for (std::size_t i = 0; i < 2 * ks.size(); ++i) md << "---|";
  md << "\n";
  for (const auto& r : reports) {
    md << "| " << r.method_name << " | " << scope_name(r.user_scope) << " |";
    for (int k : ks) md << " " << md_cell(map_get(r.recall_at, k)) << " |";
    for (int k : ks) md << " " << md_cell(map_get(r.ndcg_at, k)) << " |";
    md << "\n";
  }

  md << "\n## Efficiency (unlearning speed)\n\n";
  md << "| Method | Running-time (seconds) | Speed-up |\n|---|---|---|\n";
  std::set<std::string> seen;
  for (const auto& r : reports) {
    if (!seen.insert(r.method_name).second) continue;  // one timing row per method
    md << "| " << r.method_name << " | " << md_cell(r.runtime_seconds, "%.2f") << " | "
       << md_cell(r.speedup_vs_retrain, "%.2f") << " |\n";
  }
  return md.str();
}

}  // namespace alteraser
