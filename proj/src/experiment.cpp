#include "gate/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "gate/rng.hpp"

namespace gate {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

const std::map<std::string, std::string> kApproachNames = {
    {"A", "greedy active learning"},
    {"B", "full variables and subjects"},
    {"C", "random subjects, selected variables"},
    {"D", "random subjects, full variables"},
};

json record_common(int rep, const std::string& approach, const RunResult& r) {
  json rec;
  rec["schema_version"] = kRecordSchemaVersion;
  rec["replication"] = rep;
  rec["approach"] = approach;
  rec["n"] = r.labeled_count;
  rec["var_count"] = static_cast<int>(r.selected_vars.size());
  rec["selected_vars"] = r.selected_vars;
  rec["termination"] = r.termination;
  json m;
  m["train_acc"] = r.train_acc;
  m["train_auc"] = r.train_auc;
  m["test_acc"] = r.test_acc;
  m["test_auc"] = r.test_auc;
  if (r.selection) {
    m["tpr"] = r.selection->tpr;
    m["fpr"] = r.selection->fpr;
  }
  rec["metrics"] = m;
  return rec;
}

json record_gate(int rep, const RunResult& r) {
  json rec = record_common(rep, "A", r);
  rec["initial_labeled"] = r.initial_labeled;
  json iters = json::array();
  for (const auto& it : r.iterations) {
    json ji;
    ji["queried"] = it.batch.queried;
    ji["labels"] = it.batch.labels;
    ji["candidate_sizes"] = it.batch.candidate_sizes;
    ji["d0s"] = it.batch.d0s;
    ji["candidate_var"] = it.candidate_var;
    ji["evaluated"] = it.evaluated;
    ji["accepted"] = it.accepted;
    ji["singular_augmented"] = it.singular_augmented;
    if (it.evaluated) {
      ji["m0"] = it.stop.m0;
      ji["m1"] = it.stop.m1;
      ji["crit"] = it.stop.crit;
    }
    iters.push_back(std::move(ji));
  }
  rec["iterations"] = std::move(iters);
  return rec;
}

ReplicationMetrics metrics_from_record(const json& rec) {
  ReplicationMetrics m;
  m.n = rec.at("n").get<double>();
  m.var_count = rec.at("var_count").get<double>();
  const json& jm = rec.at("metrics");
  m.train_acc = jm.at("train_acc").get<double>();
  m.train_auc = jm.at("train_auc").get<double>();
  m.test_acc = jm.at("test_acc").get<double>();
  m.test_auc = jm.at("test_auc").get<double>();
  if (jm.contains("tpr")) m.tpr = jm.at("tpr").get<double>();
  if (jm.contains("fpr")) m.fpr = jm.at("fpr").get<double>();
  return m;
}

void write_aggregate_csv(const fs::path& path,
                         const std::vector<SummaryRow>& rows) {
  std::ofstream out(path);
  out << "approach,replications,n_mean,n_sd,train_acc_mean,train_acc_sd,"
         "train_auc_mean,train_auc_sd,test_acc_mean,test_acc_sd,"
         "test_auc_mean,test_auc_sd,tpr_mean,tpr_sd,fpr_mean,fpr_sd,"
         "vars_mean,vars_sd,sd_degenerate\n";
  for (const auto& r : rows) {
    out << r.label << ',' << r.replications;
    const auto put = [&](const MetricStat& s) {
      if (s.count == 0) {
        out << ",,";
      } else {
        out << ',' << fmt(s.mean) << ',' << fmt(s.sd);
      }
    };
    put(r.n);
    put(r.train_acc);
    put(r.train_auc);
    put(r.test_acc);
    put(r.test_auc);
    put(r.tpr);
    put(r.fpr);
    put(r.var_count);
    out << ',' << (r.sd_degenerate ? 1 : 0) << '\n';
  }
}

void write_varfreq_csv(const fs::path& path,
                       const std::vector<std::vector<int>>& selections,
                       const std::vector<std::string>& var_names) {
  int n_vars = static_cast<int>(var_names.size());
  for (const auto& sel : selections)
    for (int v : sel) n_vars = std::max(n_vars, v + 1);
  std::vector<int> counts(n_vars, 0);
  for (const auto& sel : selections)
    for (int v : sel)
      if (v >= 0) ++counts[v];

  std::ofstream out(path);
  out << "var_index,var_name,count,frequency\n";
  const double reps = selections.empty() ? 1.0 : static_cast<double>(selections.size());
  for (int j = 0; j < n_vars; ++j) {
    const std::string name =
        j < static_cast<int>(var_names.size()) ? var_names[j] : "";
    out << j << ',' << name << ',' << counts[j] << ','
        << fmt(counts[j] / reps) << '\n';
  }
}

void write_comparison(const fs::path& path, const std::vector<SummaryRow>& rows,
                      std::ostream* echo) {
  std::ofstream out(path);
  const auto emit = [&](const std::string& line) {
    out << line << '\n';
    if (echo) *echo << line << '\n';
  };
  char buf[240];
  std::snprintf(buf, sizeof(buf), "%-4s %-38s %4s %10s %10s %10s %10s %8s",
                "", "approach", "reps", "n", "test_acc", "test_auc", "tpr",
                "vars");
  emit(buf);
  for (const auto& r : rows) {
    const auto it = kApproachNames.find(r.label);
    const std::string desc = it == kApproachNames.end() ? "" : it->second;
    std::string tpr = r.tpr.count > 0 ? fmt3(r.tpr.mean) : "-";
    std::snprintf(buf, sizeof(buf), "%-4s %-38s %4d %10.1f %10.3f %10.3f %10s %8.2f",
                  r.label.c_str(), desc.c_str(), r.replications, r.n.mean,
                  r.test_acc.mean, r.test_auc.mean, tpr.c_str(),
                  r.var_count.mean);
    emit(buf);
  }
}

void write_roc_csv(const fs::path& path,
                   const std::vector<std::pair<int, RocCurve>>& curves) {
  std::ofstream out(path);
  out << "replication,fpr,tpr\n";
  for (const auto& [rep, curve] : curves)
    for (const auto& [fpr, tpr] : curve.points)
      out << rep << ',' << fmt(fpr) << ',' << fmt(tpr) << '\n';
}

// Grafting scores scale with the columns, so wildly different feature
// variances make the selection step lopsided; say so once up front.
void warn_on_uneven_scales(const DataPool& pool, std::ostream& log) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (int j = 0; j < pool.cols(); ++j) {
    if (j == pool.intercept_col) continue;
    double mean = 0.0, ss = 0.0;
    const auto& rows = pool.train_idx;
    for (int i : rows) mean += pool.x()(i, j);
    mean /= static_cast<double>(rows.size());
    for (int i : rows) {
      const double d = pool.x()(i, j) - mean;
      ss += d * d;
    }
    const double var = ss / static_cast<double>(rows.size());
    lo = std::min(lo, var);
    hi = std::max(hi, var);
  }
  if (lo <= 0.0) {
    log << "warning: a feature column has zero variance; gradient-based "
           "variable selection cannot rank it\n";
  } else if (hi / lo > 10.0) {
    log << "warning: feature variances differ by more than 10x (" << fmt3(hi / lo)
        << "x); gradient-based variable selection is scale-sensitive, "
           "consider standardizing columns\n";
  }
}

struct RepWork {
  std::map<std::string, ReplicationMetrics> metrics;
  std::map<std::string, RocCurve> rocs;
  std::vector<int> gate_selected;
  std::string error;
};

}  // namespace

ExperimentSpec spec_from_json(const json& j, std::vector<std::string>& problems) {
  ExperimentSpec spec;
  const auto grab = [&](const json& obj, const char* key, auto& into) {
    if (!obj.contains(key)) return;
    try {
      into = obj.at(key).get<std::decay_t<decltype(into)>>();
    } catch (const json::exception&) {
      problems.push_back(std::string("field '") + key + "' has the wrong type");
    }
  };

  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    grab(d, "case", spec.dataset.case_no);
    grab(d, "manifest", spec.dataset.manifest);
    grab(d, "n_total", spec.dataset.n_total);
    grab(d, "n_features", spec.dataset.n_features);
    grab(d, "test_size", spec.dataset.test_size);
    grab(d, "mu_mode", spec.dataset.mu_mode);
  }
  if (j.contains("gate")) {
    const json& g = j.at("gate");
    grab(g, "n0", spec.gate.n0);
    grab(g, "n_q", spec.gate.n_q);
    grab(g, "h", spec.gate.h);
    grab(g, "alpha", spec.gate.alpha);
    grab(g, "epsilon", spec.gate.epsilon);
    grab(g, "max_vars", spec.gate.max_vars);
    grab(g, "initial_vars", spec.gate.initial_vars);
    if (g.contains("irls")) {
      const json& ir = g.at("irls");
      grab(ir, "tol", spec.gate.irls.tol);
      grab(ir, "max_iter", spec.gate.irls.max_iter);
      grab(ir, "ridge", spec.gate.irls.ridge);
    }
  }
  grab(j, "baselines", spec.baselines);
  grab(j, "replications", spec.replications);
  grab(j, "output_dir", spec.output_dir);
  grab(j, "threads", spec.threads);
  grab(j, "seed", spec.seed);
  return spec;
}

json spec_to_json(const ExperimentSpec& spec) {
  json j;
  json d;
  if (!spec.dataset.manifest.empty()) {
    d["manifest"] = spec.dataset.manifest;
  } else {
    d["case"] = spec.dataset.case_no;
    d["n_total"] = spec.dataset.n_total;
    d["n_features"] = spec.dataset.n_features;
    d["test_size"] = spec.dataset.test_size;
    d["mu_mode"] = spec.dataset.mu_mode;
  }
  j["dataset"] = d;
  json g;
  g["n0"] = spec.gate.n0;
  g["n_q"] = spec.gate.n_q;
  g["h"] = spec.gate.h;
  g["alpha"] = spec.gate.alpha;
  g["epsilon"] = spec.gate.epsilon;
  g["max_vars"] = spec.gate.max_vars;
  if (!spec.gate.initial_vars.empty()) g["initial_vars"] = spec.gate.initial_vars;
  g["irls"] = {{"tol", spec.gate.irls.tol},
               {"max_iter", spec.gate.irls.max_iter},
               {"ridge", spec.gate.irls.ridge}};
  j["gate"] = g;
  j["baselines"] = spec.baselines;
  j["replications"] = spec.replications;
  j["output_dir"] = spec.output_dir;
  j["threads"] = spec.threads;
  j["seed"] = spec.seed;
  return j;
}

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
  std::vector<std::string> problems;
  const bool has_manifest = !spec.dataset.manifest.empty();
  if (!has_manifest && spec.dataset.case_no == 0)
    problems.push_back("dataset: set either a synthetic case (1-3) or a manifest path");
  if (has_manifest && spec.dataset.case_no != 0)
    problems.push_back("dataset: case and manifest are mutually exclusive");
  if (!has_manifest &&
      (spec.dataset.case_no < 0 || spec.dataset.case_no > 3))
    problems.push_back("dataset.case: must be 1, 2 or 3");
  if (has_manifest && !fs::exists(spec.dataset.manifest))
    problems.push_back("dataset.manifest: file not found: " + spec.dataset.manifest);
  if (!has_manifest) {
    if (spec.dataset.n_total <= spec.dataset.test_size)
      problems.push_back("dataset: n_total must exceed test_size");
    if (spec.dataset.n_features < 6)
      problems.push_back("dataset.n_features: must cover the preset coefficients (>= 6)");
    if (spec.dataset.mu_mode != "redraw" && spec.dataset.mu_mode != "fixed")
      problems.push_back("dataset.mu_mode: must be 'redraw' or 'fixed'");
  }
  if (spec.gate.n0 < 1) problems.push_back("gate.n0: must be >= 1");
  if (spec.gate.n_q < 1) problems.push_back("gate.n_q: must be >= 1");
  if (spec.gate.h < 1) problems.push_back("gate.h: must be >= 1");
  if (spec.gate.alpha <= 0.0 || spec.gate.alpha >= 1.0)
    problems.push_back("gate.alpha: must lie strictly inside (0,1)");
  if (spec.gate.epsilon <= 0.0) problems.push_back("gate.epsilon: must be > 0");
  if (spec.gate.irls.tol <= 0.0) problems.push_back("gate.irls.tol: must be > 0");
  if (spec.gate.irls.max_iter < 1)
    problems.push_back("gate.irls.max_iter: must be >= 1");
  if (spec.replications < 1) problems.push_back("replications: must be >= 1");
  if (spec.threads < 0) problems.push_back("threads: must be >= 0");
  if (spec.output_dir.empty()) problems.push_back("output_dir: must be set");
  for (char b : spec.baselines)
    if (b != 'B' && b != 'C' && b != 'D')
      problems.push_back(std::string("baselines: unknown approach '") + b + "'");
  return problems;
}

ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::ostream& log) {
  const auto problems = validate_spec(spec);
  if (!problems.empty())
    throw InvalidSpec("invalid experiment spec: " + problems.front());

  const fs::path out_dir(spec.output_dir);
  fs::create_directories(out_dir);

  const bool synthetic = spec.dataset.manifest.empty();
  DataPool base_pool;
  std::optional<Eigen::VectorXd> fixed_mu;
  TrueModelSpec truth;
  if (synthetic) {
    truth = TrueModelSpec::preset(spec.dataset.case_no, spec.dataset.n_features);
    if (spec.dataset.mu_mode == "fixed") {
      Rng mu_rng(derive_seed(spec.seed, 0));
      Eigen::VectorXd mu = Eigen::VectorXd::Zero(spec.dataset.n_features);
      for (int j = 1; j < spec.dataset.n_features; ++j)
        mu(j) = mu_rng.uniform(-1.0, 1.0);
      fixed_mu = std::move(mu);
    }
  } else {
    base_pool = load_manifest(spec.dataset.manifest);
    if (base_pool.test_idx.empty())
      throw InvalidSpec("manifest dataset needs a train/test split");
    const auto [neg, pos] = class_counts(base_pool);
    log << "dataset: " << base_pool.rows() << " rows, " << base_pool.cols()
        << " variables (incl. intercept), classes " << neg << "/" << pos << "\n";
  }

  {
    const DataPool& probe =
        synthetic ? (base_pool = gen_synthetic(
                         truth, spec.dataset.n_total, spec.dataset.n_features,
                         spec.dataset.test_size, derive_seed(derive_seed(spec.seed, 1), 0),
                         fixed_mu))
                  : base_pool;
    warn_on_uneven_scales(probe, log);
  }

  const int reps = spec.replications;
  std::vector<RepWork> work(reps);
  std::atomic<int> next{0};
  std::mutex log_mutex;

  const auto run_one = [&](int rep) {
    RepWork& slot = work[rep];
    const std::uint64_t rep_seed = derive_seed(spec.seed, 1 + rep);
    std::vector<std::string> lines;
    try {
      DataPool pool =
          synthetic
              ? gen_synthetic(truth, spec.dataset.n_total,
                              spec.dataset.n_features, spec.dataset.test_size,
                              derive_seed(rep_seed, 0), fixed_mu)
              : base_pool;

      GateConfig cfg = spec.gate;
      cfg.seed = derive_seed(rep_seed, 1);
      LabelOracle oracle(pool);
      const RunResult a = run_gate(cfg, pool, oracle);
      if (oracle.query_count() != a.labeled_count)
        throw std::logic_error("oracle audit failed: query count != labeled count");
      slot.metrics["A"] = a.metrics();
      slot.rocs["A"] = a.test_roc;
      slot.gate_selected = a.selected_vars;
      lines.push_back(record_gate(rep, a).dump());

      for (char b : spec.baselines) {
        RunResult r;
        if (b == 'B') {
          r = run_baseline_full(pool, cfg.alpha);
        } else if (b == 'C') {
          r = run_baseline_random_selected(pool, a.labeled_count,
                                           a.selected_vars,
                                           derive_seed(rep_seed, 2), cfg.alpha);
        } else {
          r = run_baseline_random_full(pool, a.labeled_count,
                                       derive_seed(rep_seed, 3), cfg.alpha);
        }
        const std::string label(1, b);
        slot.metrics[label] = r.metrics();
        slot.rocs[label] = r.test_roc;
        lines.push_back(record_common(rep, label, r).dump());
      }
    } catch (const std::exception& e) {
      slot.error = e.what();
      json err;
      err["schema_version"] = kRecordSchemaVersion;
      err["replication"] = rep;
      err["error"] = slot.error;
      lines.push_back(err.dump());
      std::lock_guard<std::mutex> lk(log_mutex);
      log << "replication " << rep << " failed: " << slot.error << "\n";
    }
    std::ofstream out(out_dir / ("rep_" + std::to_string(rep) + ".jsonl"));
    for (const auto& l : lines) out << l << '\n';
  };

  int n_threads = spec.threads == 0
                      ? static_cast<int>(std::thread::hardware_concurrency())
                      : spec.threads;
  n_threads = std::max(1, std::min(n_threads, reps));
  if (n_threads == 1) {
    for (int r = 0; r < reps; ++r) run_one(r);
  } else {
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (int t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1))
          run_one(r);
      });
    }
    for (auto& w : workers) w.join();
  }

  // Deterministic reduction in replication order.
  ExperimentOutcome outcome;
  std::map<std::string, std::vector<ReplicationMetrics>> by_approach;
  std::map<std::string, std::vector<std::pair<int, RocCurve>>> roc_by_approach;
  std::vector<std::vector<int>> selections;
  for (int r = 0; r < reps; ++r) {
    if (!work[r].error.empty()) {
      outcome.failures.push_back("replication " + std::to_string(r) + ": " +
                                 work[r].error);
      continue;
    }
    for (const auto& [label, m] : work[r].metrics) by_approach[label].push_back(m);
    for (const auto& [label, roc] : work[r].rocs)
      roc_by_approach[label].emplace_back(r, roc);
    selections.push_back(work[r].gate_selected);
  }

  for (const auto& label : {"A", "B", "C", "D"}) {
    const auto it = by_approach.find(label);
    if (it != by_approach.end())
      outcome.summary.push_back(aggregate(label, it->second));
  }

  write_aggregate_csv(out_dir / "aggregate.csv", outcome.summary);
  write_varfreq_csv(out_dir / "varfreq.csv", selections, base_pool.var_names);
  write_comparison(out_dir / "comparison.txt", outcome.summary, &log);
  for (const auto& [label, curves] : roc_by_approach)
    write_roc_csv(out_dir / ("roc_" + label + ".csv"), curves);

  {
    std::ofstream timing(out_dir / "timing.csv");
    timing << "approach,replications,mean_seconds,sd_seconds\n";
    for (const auto& row : outcome.summary)
      timing << row.label << ',' << row.replications << ','
             << fmt(row.wall_time.mean) << ',' << fmt(row.wall_time.sd) << '\n';
  }
  {
    json meta;
    meta["schema_version"] = kRecordSchemaVersion;
    meta["spec"] = spec_to_json(spec);
    meta["var_names"] = base_pool.var_names;
    std::ofstream out(out_dir / "meta.json");
    out << meta.dump(2) << '\n';
  }

  if (outcome.summary.empty())
    throw std::runtime_error("all replications failed");
  return outcome;
}

int write_report(const std::string& results_dir, std::ostream& log) {
  const fs::path dir(results_dir);
  if (!fs::is_directory(dir)) {
    log << "error: not a directory: " << results_dir << "\n";
    return 1;
  }

  std::vector<std::pair<int, fs::path>> rep_files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("rep_", 0) == 0 && name.size() > 10 &&
        name.substr(name.size() - 6) == ".jsonl") {
      try {
        rep_files.emplace_back(std::stoi(name.substr(4)), entry.path());
      } catch (const std::exception&) {
        // not a replication record; ignore
      }
    }
  }
  if (rep_files.empty()) {
    log << "error: no results (rep_*.jsonl) in " << results_dir << "\n";
    return 1;
  }
  std::sort(rep_files.begin(), rep_files.end());

  std::vector<std::string> var_names;
  if (fs::exists(dir / "meta.json")) {
    try {
      std::ifstream in(dir / "meta.json");
      json meta;
      in >> meta;
      if (meta.contains("var_names"))
        var_names = meta.at("var_names").get<std::vector<std::string>>();
    } catch (const std::exception&) {
      // names are cosmetic; proceed without them
    }
  }

  std::map<std::string, std::vector<ReplicationMetrics>> by_approach;
  std::vector<std::vector<int>> selections;
  for (const auto& [rep, path] : rep_files) {
    std::ifstream in(path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      json rec;
      try {
        rec = json::parse(line);
      } catch (const json::exception& e) {
        log << "error: corrupt record in " << path.string() << " line "
            << line_no << ": " << e.what() << "\n";
        return 1;
      }
      const int version = rec.value("schema_version", -1);
      if (version != kRecordSchemaVersion) {
        log << "error: unsupported schema version " << version << " in "
            << path.string() << " line " << line_no << " (expected "
            << kRecordSchemaVersion << ")\n";
        return 1;
      }
      if (rec.contains("error")) {
        log << "note: skipping failed replication record in " << path.string()
            << " line " << line_no << "\n";
        continue;
      }
      try {
        const std::string label = rec.at("approach").get<std::string>();
        by_approach[label].push_back(metrics_from_record(rec));
        if (label == "A")
          selections.push_back(rec.at("selected_vars").get<std::vector<int>>());
      } catch (const json::exception& e) {
        log << "error: corrupt record in " << path.string() << " line "
            << line_no << ": " << e.what() << "\n";
        return 1;
      }
    }
  }

  std::vector<SummaryRow> summary;
  for (const auto& label : {"A", "B", "C", "D"}) {
    const auto it = by_approach.find(label);
    if (it != by_approach.end()) summary.push_back(aggregate(label, it->second));
  }
  if (summary.empty()) {
    log << "error: no usable records in " << results_dir << "\n";
    return 1;
  }

  write_aggregate_csv(dir / "aggregate.csv", summary);
  write_varfreq_csv(dir / "varfreq.csv", selections, var_names);
  write_comparison(dir / "comparison.txt", summary, &log);
  return 0;
}

}  // namespace gate
