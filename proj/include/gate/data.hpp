#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "gate/errors.hpp"

namespace gate {

/// Generating model for synthetic pools: true coefficients and their support.
struct TrueModelSpec {
  Eigen::VectorXd beta_true;
  std::vector<int> active_set;  // {j : beta_true[j] != 0}
  int case_id = 0;              // 1..3 presets, 0 = custom

  /// The three built-in coefficient presets over n_features variables
  /// (variable 0 is the intercept column).
  static TrueModelSpec preset(int case_no, int n_features);
  static TrueModelSpec custom(Eigen::VectorXd beta);
};

/// Feature pool with a train/test split and the labeled/unlabeled partition
/// of the training half. Feature and label storage is shared and immutable;
/// only the labeling state is per-instance.
class DataPool {
 public:
  DataPool() = default;
  DataPool(std::shared_ptr<const Eigen::MatrixXd> x,
           std::shared_ptr<const std::vector<int>> y);

  const Eigen::MatrixXd& x() const { return *x_; }
  int rows() const { return static_cast<int>(x_->rows()); }
  int cols() const { return static_cast<int>(x_->cols()); }

  /// Ground-truth label access for evaluation; the learning loop must go
  /// through a LabelOracle instead.
  int label(int i) const { return (*y_)[i]; }
  std::shared_ptr<const std::vector<int>> label_store() const { return y_; }

  const std::vector<int>& labeled() const { return labeled_; }
  const std::vector<int>& unlabeled() const { return unlabeled_; }

  /// Replaces the labeled set (must be a subset of train_idx); the unlabeled
  /// set becomes the sorted remainder of the training indices.
  void set_labeled(std::vector<int> labeled);

  /// Moves one index from the unlabeled to the labeled set.
  void mark_labeled(int pool_index);

  std::vector<int> train_idx;
  std::vector<int> test_idx;
  std::vector<std::string> var_names;
  int intercept_col = -1;
  std::optional<TrueModelSpec> truth;
  std::optional<Eigen::VectorXd> gen_mu;  // per-column means drawn at generation

 private:
  std::shared_ptr<const Eigen::MatrixXd> x_;
  std::shared_ptr<const std::vector<int>> y_;
  std::vector<int> labeled_;
  std::vector<int> unlabeled_;
};

/// Reveals stored labels for training-pool indices only. Reveals are
/// memoized: the query count increments exactly once per distinct index.
class LabelOracle {
 public:
  explicit LabelOracle(const DataPool& pool);

  int reveal(int pool_index);
  int label_of(int pool_index) const;  // requires a prior reveal
  bool revealed(int pool_index) const;
  std::int64_t query_count() const { return query_count_; }

 private:
  std::shared_ptr<const std::vector<int>> y_;
  std::vector<char> is_train_;
  std::unordered_map<int, int> revealed_;
  std::int64_t query_count_ = 0;
};

/// Synthetic pool: variable 0 is a constant intercept column, the remaining
/// columns are unit-variance normals whose means are drawn uniformly from
/// (-1, 1) once per dataset, and labels are Bernoulli draws from the logistic
/// probability under spec.beta_true. A uniform random test split of
/// test_size rows is held out. Draw order (one seeded stream): column means,
/// features row by row, labels, split shuffle.
DataPool gen_synthetic(const TrueModelSpec& spec, int n_total, int n_features,
                       int test_size, std::uint64_t seed,
                       const std::optional<Eigen::VectorXd>& fixed_mu = {});

struct CsvSchema {
  std::string label_column;              // by header name, or
  int label_index = -1;                  // by 0-based column index
  bool has_header = true;
  bool add_intercept = true;             // prepend a ones column
  int intercept_col = -1;                // column already holding the intercept
  std::vector<std::string> label_values; // optional {zero, one} string mapping
};

/// Parses a comma-separated numeric file into a pool (no split applied; all
/// rows start as training data). Rejects wrong-arity rows; non-numeric cells
/// raise ParseError with 1-based line and column.
DataPool load_csv(const std::string& path, const CsvSchema& schema);

/// Dataset manifest: JSON file naming a CSV, its schema and the train/test
/// split, e.g. {"path": "wave.csv", "label_column": "class",
/// "intercept": "add", "split": {"type": "first_n", "train": 10000}}.
DataPool load_manifest(const std::string& manifest_path);

/// Samples n0 training points uniformly without replacement as the initial
/// labeled set.
DataPool initial_split(DataPool pool, int n0, std::uint64_t seed);

/// (negatives, positives) over the whole pool.
std::pair<int, int> class_counts(const DataPool& pool);

}  // namespace gate
