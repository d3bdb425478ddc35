#include "gate/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace gate {

double accuracy(const std::vector<int>& pred, const std::vector<int>& truth) {
  if (pred.size() != truth.size() || pred.empty())
    throw DimensionMismatch("accuracy: need equal nonempty label vectors");
  int hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& truth) {
  if (scores.size() != truth.size() || scores.empty())
    throw DimensionMismatch("roc_auc: need equal nonempty vectors");
  const auto n_pos = static_cast<double>(std::count(truth.begin(), truth.end(), 1));
  const auto n_neg = static_cast<double>(truth.size()) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw SingleClass("roc_auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Rank sum of positives with average ranks for tied scores.
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t t = i; t < j; ++t)
      if (truth[order[t]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }

  RocCurve roc;
  roc.auc = (rank_sum_pos - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);

  // Threshold sweep from high scores to low, grouping ties.
  roc.points.emplace_back(0.0, 0.0);
  double tp = 0.0, fp = 0.0;
  for (std::size_t i = order.size(); i > 0;) {
    std::size_t j = i;
    while (j > 0 && scores[order[j - 1]] == scores[order[i - 1]]) --j;
    for (std::size_t t = j; t < i; ++t)
      (truth[order[t]] == 1 ? tp : fp) += 1.0;
    roc.points.emplace_back(fp / n_neg, tp / n_pos);
    i = j;
  }
  return roc;
}

SelectionQuality selection_quality(const std::vector<int>& selected,
                                   const std::vector<int>& truth_active,
                                   int n_vars, std::optional<int> exclude_var) {
  std::vector<char> in_truth(n_vars, 0), counted(n_vars, 1);
  if (exclude_var) {
    if (*exclude_var < 0 || *exclude_var >= n_vars)
      throw std::invalid_argument("selection_quality: exclude index out of range");
    counted[*exclude_var] = 0;
  }
  int truth_size = 0;
  for (int j : truth_active) {
    if (j < 0 || j >= n_vars)
      throw std::invalid_argument("selection_quality: truth index out of range");
    if (!counted[j]) continue;
    in_truth[j] = 1;
    ++truth_size;
  }
  int universe = 0;
  for (int j = 0; j < n_vars; ++j) universe += counted[j];
  const int complement_size = universe - truth_size;
  if (truth_size == 0 || complement_size == 0)
    throw EmptyTruthSet("selection_quality: truth set or complement empty");

  int true_hits = 0, false_hits = 0;
  std::vector<char> seen(n_vars, 0);
  for (int j : selected) {
    if (j < 0 || j >= n_vars)
      throw std::invalid_argument("selection_quality: selected index out of range");
    if (!counted[j] || seen[j]) continue;
    seen[j] = 1;
    (in_truth[j] ? true_hits : false_hits) += 1;
  }
  return {static_cast<double>(true_hits) / truth_size,
          static_cast<double>(false_hits) / complement_size};
}

namespace {

MetricStat stat_of(const std::vector<double>& values) {
  MetricStat s;
  s.count = static_cast<int>(values.size());
  if (values.empty()) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.count;
  if (s.count > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / (s.count - 1));
  }
  return s;
}

}  // namespace

SummaryRow aggregate(const std::string& label,
                     const std::vector<ReplicationMetrics>& results) {
  if (results.empty()) throw EmptyResults("aggregate: no results");
  SummaryRow row;
  row.label = label;
  row.replications = static_cast<int>(results.size());
  row.sd_degenerate = results.size() == 1;

  const auto collect = [&](auto getter) {
    std::vector<double> v;
    v.reserve(results.size());
    for (const auto& r : results) {
      auto value = getter(r);
      if constexpr (std::is_same_v<decltype(value), std::optional<double>>) {
        if (value) v.push_back(*value);
      } else {
        v.push_back(value);
      }
    }
    return stat_of(v);
  };

  row.n = collect([](const ReplicationMetrics& r) { return r.n; });
  row.train_acc = collect([](const ReplicationMetrics& r) { return r.train_acc; });
  row.train_auc = collect([](const ReplicationMetrics& r) { return r.train_auc; });
  row.test_acc = collect([](const ReplicationMetrics& r) { return r.test_acc; });
  row.test_auc = collect([](const ReplicationMetrics& r) { return r.test_auc; });
  row.var_count = collect([](const ReplicationMetrics& r) { return r.var_count; });
  row.wall_time = collect([](const ReplicationMetrics& r) { return r.wall_time; });
  row.tpr = collect([](const ReplicationMetrics& r) { return r.tpr; });
  row.fpr = collect([](const ReplicationMetrics& r) { return r.fpr; });
  return row;
}

}  // namespace gate
