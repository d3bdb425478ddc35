#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gate/driver.hpp"

namespace gate {

inline constexpr int kRecordSchemaVersion = 1;

struct DatasetSpec {
  int case_no = 0;          // 1..3 synthetic presets; 0 when a manifest is used
  std::string manifest;     // csv manifest path
  int n_total = 20000;
  int n_features = 100;
  int test_size = 5000;
  std::string mu_mode = "redraw";  // redraw | fixed (column means across reps)
};

struct ExperimentSpec {
  DatasetSpec dataset;
  GateConfig gate;
  std::string baselines = "BCD";  // subset of BCD; the active run always executes
  int replications = 1;
  std::string output_dir = "gate-out";
  int threads = 1;  // 0 = hardware concurrency
  std::uint64_t seed = 0;
};

/// Parses a spec; malformed fields are appended to problems instead of
/// throwing so a validate pass can report everything at once.
ExperimentSpec spec_from_json(const nlohmann::json& j,
                              std::vector<std::string>& problems);

nlohmann::json spec_to_json(const ExperimentSpec& spec);

/// Constraint violations (empty when the spec is runnable).
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

struct ExperimentOutcome {
  std::vector<SummaryRow> summary;  // one row per approach, A first
  std::vector<std::string> failures;
};

/// Runs all replications (seed-split, optionally threaded), writes
/// rep_<k>.jsonl, aggregate.csv, varfreq.csv, roc_<approach>.csv, timing.csv,
/// comparison.txt and meta.json under spec.output_dir. Timing is the one
/// environment-dependent output and is kept out of the JSON records and
/// aggregate.csv so reruns with one seed are byte-identical.
ExperimentOutcome run_experiment(const ExperimentSpec& spec, std::ostream& log);

/// Rebuilds aggregate.csv, varfreq.csv and comparison.txt from the JSON-line
/// records in results_dir. Returns 0 on success, 1 on unreadable or corrupt
/// records (naming file and line).
int write_report(const std::string& results_dir, std::ostream& log);

}  // namespace gate
