#include "gate/data.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "gate/logistic.hpp"
#include "gate/rng.hpp"

namespace gate {

TrueModelSpec TrueModelSpec::preset(int case_no, int n_features) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(n_features);
  switch (case_no) {
    case 1:
      if (n_features < 5) throw InvalidSpec("case 1 needs >= 5 variables");
      beta.head(5) << 0.5, -2.0, -0.6, 0.5, 1.2;
      break;
    case 2:
      if (n_features < 5) throw InvalidSpec("case 2 needs >= 5 variables");
      beta.head(5) << 5.0, -20.0, -6.0, 5.0, 12.0;
      break;
    case 3:
      if (n_features < 6) throw InvalidSpec("case 3 needs >= 6 variables");
      beta.head(6) << 1.0, -4.0, -2.0, 2.0, 3.0, 7.0;
      break;
    default:
      throw InvalidSpec("unknown preset case " + std::to_string(case_no));
  }
  TrueModelSpec spec = custom(std::move(beta));
  spec.case_id = case_no;
  return spec;
}

TrueModelSpec TrueModelSpec::custom(Eigen::VectorXd beta) {
  TrueModelSpec spec;
  for (Eigen::Index j = 0; j < beta.size(); ++j)
    if (beta(j) != 0.0) spec.active_set.push_back(static_cast<int>(j));
  spec.beta_true = std::move(beta);
  return spec;
}

DataPool::DataPool(std::shared_ptr<const Eigen::MatrixXd> x,
                   std::shared_ptr<const std::vector<int>> y)
    : x_(std::move(x)), y_(std::move(y)) {
  if (static_cast<std::size_t>(x_->rows()) != y_->size())
    throw DimensionMismatch("DataPool: feature/label row mismatch");
}

void DataPool::set_labeled(std::vector<int> labeled) {
  std::sort(labeled.begin(), labeled.end());
  std::vector<char> picked(rows(), 0);
  for (int i : labeled) picked[i] = 1;
  unlabeled_.clear();
  for (int i : train_idx)
    if (!picked[i]) unlabeled_.push_back(i);
  std::sort(unlabeled_.begin(), unlabeled_.end());
  labeled_ = std::move(labeled);
}

void DataPool::mark_labeled(int pool_index) {
  auto it = std::lower_bound(unlabeled_.begin(), unlabeled_.end(), pool_index);
  if (it == unlabeled_.end() || *it != pool_index)
    throw InvalidSpec("mark_labeled: index not in the unlabeled pool");
  unlabeled_.erase(it);
  labeled_.push_back(pool_index);
}

LabelOracle::LabelOracle(const DataPool& pool)
    : y_(pool.label_store()), is_train_(pool.rows(), 0) {
  for (int i : pool.train_idx) is_train_[i] = 1;
}

int LabelOracle::reveal(int pool_index) {
  if (pool_index < 0 || pool_index >= static_cast<int>(is_train_.size()))
    throw OracleFailure("oracle: index out of range");
  if (!is_train_[pool_index])
    throw OracleFailure("oracle: refusing to reveal a test-split label");
  auto [it, inserted] = revealed_.try_emplace(pool_index, (*y_)[pool_index]);
  if (inserted) ++query_count_;
  return it->second;
}

int LabelOracle::label_of(int pool_index) const {
  auto it = revealed_.find(pool_index);
  if (it == revealed_.end())
    throw OracleFailure("oracle: label was never revealed");
  return it->second;
}

bool LabelOracle::revealed(int pool_index) const {
  return revealed_.count(pool_index) > 0;
}

DataPool gen_synthetic(const TrueModelSpec& spec, int n_total, int n_features,
                       int test_size, std::uint64_t seed,
                       const std::optional<Eigen::VectorXd>& fixed_mu) {
  if (spec.beta_true.size() != n_features)
    throw InvalidSpec("gen_synthetic: beta length must equal n_features");
  if (n_total <= test_size)
    throw InvalidSpec("gen_synthetic: need n_total > test_size");
  if (n_features < 1) throw InvalidSpec("gen_synthetic: need >= 1 variable");

  Rng rng(seed);

  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n_features);
  if (fixed_mu) {
    if (fixed_mu->size() != n_features)
      throw InvalidSpec("gen_synthetic: fixed mu length mismatch");
    mu = *fixed_mu;
  } else {
    for (int j = 1; j < n_features; ++j) mu(j) = rng.uniform(-1.0, 1.0);
  }

  auto x = std::make_shared<Eigen::MatrixXd>(n_total, n_features);
  for (int i = 0; i < n_total; ++i) {
    (*x)(i, 0) = 1.0;
    for (int j = 1; j < n_features; ++j) (*x)(i, j) = mu(j) + rng.normal();
  }

  auto y = std::make_shared<std::vector<int>>(n_total);
  for (int i = 0; i < n_total; ++i) {
    const double p = sigmoid(spec.beta_true.dot(x->row(i)));
    (*y)[i] = rng.bernoulli(p);
  }

  std::vector<int> order(n_total);
  std::iota(order.begin(), order.end(), 0);
  std::vector<int> test = rng.take(std::move(order), test_size);
  std::sort(test.begin(), test.end());

  DataPool pool(std::move(x), std::move(y));
  std::vector<char> is_test(n_total, 0);
  for (int i : test) is_test[i] = 1;
  for (int i = 0; i < n_total; ++i)
    if (!is_test[i]) pool.train_idx.push_back(i);
  pool.test_idx = std::move(test);

  pool.var_names.reserve(n_features);
  for (int j = 0; j < n_features; ++j)
    pool.var_names.push_back("x" + std::to_string(j + 1));
  pool.intercept_col = 0;
  pool.truth = spec;
  pool.gen_mu = std::move(mu);
  pool.set_labeled({});
  return pool;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_cell(const std::string& raw, int line_no, int col_no) {
  const std::string cell = trim(raw);
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("non-numeric cell '" + cell + "' at line " +
                         std::to_string(line_no) + ", column " +
                         std::to_string(col_no),
                     line_no, col_no);
  return value;
}

int parse_label(const std::string& raw, const CsvSchema& schema, int line_no,
                int col_no) {
  const std::string cell = trim(raw);
  if (!schema.label_values.empty()) {
    if (schema.label_values.size() != 2)
      throw InvalidSpec("label_values must list exactly two classes");
    if (cell == schema.label_values[0]) return 0;
    if (cell == schema.label_values[1]) return 1;
    throw NonBinaryLabel("label '" + cell + "' at line " +
                         std::to_string(line_no) +
                         " is not one of the two declared classes");
  }
  double v = -1.0;
  try {
    v = parse_cell(cell, line_no, col_no);
  } catch (const ParseError&) {
    throw NonBinaryLabel("label '" + cell + "' at line " +
                         std::to_string(line_no) +
                         " is not numeric; declare label_values to map classes");
  }
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  throw NonBinaryLabel("label at line " + std::to_string(line_no) +
                       " is not 0/1; declare label_values to map classes");
}

}  // namespace

DataPool load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw InvalidSpec("cannot open csv file: " + path);

  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  if (schema.has_header) {
    if (!std::getline(in, line))
      throw ParseError("empty csv file: " + path, 1, 1);
    ++line_no;
    header = split_line(line);
    for (auto& h : header) h = trim(h);
  }

  int label_col = schema.label_index;
  if (label_col < 0) {
    if (schema.label_column.empty())
      throw InvalidSpec("csv schema needs label_column or label_index");
    if (!schema.has_header)
      throw InvalidSpec("label_column by name requires a header");
    for (std::size_t j = 0; j < header.size(); ++j)
      if (header[j] == schema.label_column) label_col = static_cast<int>(j);
    if (label_col < 0)
      throw MissingColumn("label column '" + schema.label_column +
                          "' not found in header");
  }

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  int width = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);
    if (width < 0) {
      width = static_cast<int>(cells.size());
      if (label_col >= width)
        throw MissingColumn("label column index " + std::to_string(label_col) +
                            " out of range for " + std::to_string(width) +
                            " columns");
    } else if (static_cast<int>(cells.size()) != width) {
      throw ParseError("row has " + std::to_string(cells.size()) +
                           " cells, expected " + std::to_string(width) +
                           " at line " + std::to_string(line_no),
                       line_no, 1);
    }
    std::vector<double> row;
    row.reserve(width - 1);
    for (int j = 0; j < width; ++j) {
      if (j == label_col) {
        labels.push_back(parse_label(cells[j], schema, line_no, j + 1));
      } else {
        row.push_back(parse_cell(cells[j], line_no, j + 1));
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("csv has no data rows: " + path, line_no, 1);

  const int n = static_cast<int>(rows.size());
  const int p_raw = width - 1;
  const int offset = schema.add_intercept ? 1 : 0;
  auto x = std::make_shared<Eigen::MatrixXd>(n, p_raw + offset);
  for (int i = 0; i < n; ++i) {
    if (schema.add_intercept) (*x)(i, 0) = 1.0;
    for (int j = 0; j < p_raw; ++j) (*x)(i, j + offset) = rows[i][j];
  }

  DataPool pool(std::move(x),
                std::make_shared<std::vector<int>>(std::move(labels)));
  if (schema.add_intercept) {
    pool.intercept_col = 0;
    pool.var_names.push_back("intercept");
  } else if (schema.intercept_col >= 0) {
    pool.intercept_col = schema.intercept_col;
    for (int i = 0; i < n; ++i)
      if (pool.x()(i, pool.intercept_col) != 1.0)
        throw InvalidSpec("declared intercept column is not identically 1");
  }
  for (int j = 0; j < p_raw; ++j) {
    int src = j < label_col ? j : j + 1;
    pool.var_names.push_back(schema.has_header && src < static_cast<int>(header.size())
                                 ? header[src]
                                 : "v" + std::to_string(j + 1));
  }

  pool.train_idx.resize(n);
  std::iota(pool.train_idx.begin(), pool.train_idx.end(), 0);
  pool.set_labeled({});
  return pool;
}

DataPool load_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InvalidSpec("cannot open manifest: " + manifest_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidSpec(std::string("manifest is not valid json: ") + e.what());
  }

  if (!j.contains("path")) throw InvalidSpec("manifest: missing 'path'");
  std::filesystem::path csv = j.at("path").get<std::string>();
  if (csv.is_relative())
    csv = std::filesystem::path(manifest_path).parent_path() / csv;

  CsvSchema schema;
  if (j.contains("label_column")) {
    if (j.at("label_column").is_number_integer())
      schema.label_index = j.at("label_column").get<int>();
    else
      schema.label_column = j.at("label_column").get<std::string>();
  }
  schema.has_header = j.value("has_header", true);
  const std::string intercept = j.value("intercept", "add");
  if (intercept == "add") {
    schema.add_intercept = true;
  } else if (intercept == "none") {
    schema.add_intercept = false;
  } else {
    schema.add_intercept = false;
    try {
      schema.intercept_col = std::stoi(intercept);
    } catch (const std::exception&) {
      throw InvalidSpec("manifest: intercept must be 'add', 'none' or a column index");
    }
  }
  if (j.contains("label_values"))
    schema.label_values = j.at("label_values").get<std::vector<std::string>>();

  DataPool pool = load_csv(csv.string(), schema);

  if (j.contains("split")) {
    const auto& s = j.at("split");
    const std::string type = s.value("type", "first_n");
    const int train_n = s.value("train", 0);
    if (train_n <= 0 || train_n >= pool.rows())
      throw InvalidSpec("manifest split: 'train' must be in (0, rows)");
    std::vector<int> order(pool.rows());
    std::iota(order.begin(), order.end(), 0);
    if (type == "random") {
      Rng rng(s.value("seed", std::uint64_t{0}));
      order = rng.take(std::move(order), order.size());
    } else if (type != "first_n") {
      throw InvalidSpec("manifest split: unknown type '" + type + "'");
    }
    pool.train_idx.assign(order.begin(), order.begin() + train_n);
    pool.test_idx.assign(order.begin() + train_n, order.end());
    std::sort(pool.train_idx.begin(), pool.train_idx.end());
    std::sort(pool.test_idx.begin(), pool.test_idx.end());
    pool.set_labeled({});
  }
  return pool;
}

DataPool initial_split(DataPool pool, int n0, std::uint64_t seed) {
  if (n0 < 0 || n0 > static_cast<int>(pool.train_idx.size()))
    throw InsufficientPool("initial_split: n0 exceeds the training pool");
  Rng rng(seed);
  std::vector<int> picked = rng.take(pool.train_idx, static_cast<std::size_t>(n0));
  pool.set_labeled(std::move(picked));
  return pool;
}

std::pair<int, int> class_counts(const DataPool& pool) {
  int neg = 0, pos = 0;
  for (int i = 0; i < pool.rows(); ++i) (pool.label(i) ? pos : neg) += 1;
  return {neg, pos};
}

}  // namespace gate
