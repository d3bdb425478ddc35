#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gate/errors.hpp"

namespace gate {

/// Fraction of positions where the two label vectors agree.
double accuracy(const std::vector<int>& pred, const std::vector<int>& truth);

/// ROC curve from a threshold sweep over the distinct scores, plus the AUC.
/// points run from (0,0) to (1,1) with nondecreasing fpr; auc is computed by
/// the rank (concordance) formulation with ties counted 1/2 and equals the
/// trapezoidal integral of the curve.
struct RocCurve {
  std::vector<std::pair<double, double>> points;  // (fpr, tpr)
  double auc = 0.0;
};

/// Throws SingleClass unless both classes are present.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& truth);

/// Variable-identification quality: tpr = |J ∩ T| / |T| over the true active
/// set T, fpr = |J ∩ T^c| / |T^c| over its complement in {0..P-1}. When
/// exclude_var is set, that index is dropped from both universes (the
/// intercept is counted by default).
struct SelectionQuality {
  double tpr = 0.0;
  double fpr = 0.0;
};

SelectionQuality selection_quality(const std::vector<int>& selected,
                                   const std::vector<int>& truth_active,
                                   int n_vars,
                                   std::optional<int> exclude_var = {});

/// One replication's scalar metrics, ready for aggregation.
struct ReplicationMetrics {
  double n = 0.0;
  double train_acc = 0.0;
  double train_auc = 0.0;
  double test_acc = 0.0;
  double test_auc = 0.0;
  double var_count = 0.0;
  double wall_time = 0.0;
  std::optional<double> tpr;
  std::optional<double> fpr;
};

struct MetricStat {
  double mean = 0.0;
  double sd = 0.0;
  int count = 0;
};

/// Mean and sample standard deviation (n-1 denominator) per metric. A single
/// replication reports sd = 0 with sd_degenerate set.
struct SummaryRow {
  std::string label;
  int replications = 0;
  bool sd_degenerate = false;
  MetricStat n, train_acc, train_auc, test_acc, test_auc, tpr, fpr, var_count,
      wall_time;
};

SummaryRow aggregate(const std::string& label,
                     const std::vector<ReplicationMetrics>& results);

}  // namespace gate
