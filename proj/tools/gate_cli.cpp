#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "gate/experiment.hpp"

namespace {

struct Flags {
  std::optional<std::string> spec_path, manifest, out_dir, baselines, mu_mode;
  std::optional<int> case_no, reps, threads, n0, n_q, h, max_vars;
  std::optional<int> n_total, n_features, test_size, irls_max_iter;
  std::optional<double> alpha, epsilon, irls_tol;
  std::optional<std::uint64_t> seed;
};

void add_spec_options(CLI::App* cmd, Flags& f) {
  cmd->set_help_flag("--help", "print help");  // frees --h for the scope order
  cmd->add_option("--spec", f.spec_path, "experiment spec file (json)");
  cmd->add_option("--case", f.case_no, "synthetic coefficient preset (1-3)");
  cmd->add_option("--dataset", f.manifest, "csv dataset manifest (json)");
  cmd->add_option("--reps", f.reps, "number of replications");
  cmd->add_option("--seed", f.seed, "master seed (replications are seed-split)");
  cmd->add_option("--out", f.out_dir, "output directory");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_option("--baselines", f.baselines,
                  "comparison approaches to run, subset of BCD");
  cmd->add_option("--n0", f.n0, "initial labeled size");
  cmd->add_option("--n-q", f.n_q, "batch size per iteration");
  cmd->add_option("--h", f.h, "candidate-scope order statistic");
  cmd->add_option("--alpha", f.alpha, "classification threshold");
  cmd->add_option("--epsilon", f.epsilon, "stopping threshold");
  cmd->add_option("--max-vars", f.max_vars, "cap on selected variables (0 = all)");
  cmd->add_option("--n-total", f.n_total, "synthetic pool size");
  cmd->add_option("--n-features", f.n_features, "synthetic variable count");
  cmd->add_option("--test-size", f.test_size, "synthetic test split size");
  cmd->add_option("--mu-mode", f.mu_mode,
                  "column means across replications: redraw|fixed");
  cmd->add_option("--irls-tol", f.irls_tol, "fit gradient tolerance");
  cmd->add_option("--irls-max-iter", f.irls_max_iter, "fit iteration cap");
}

gate::ExperimentSpec build_spec(const Flags& f, std::vector<std::string>& problems) {
  gate::ExperimentSpec spec;
  if (f.spec_path) {
    std::ifstream in(*f.spec_path);
    if (!in) {
      problems.push_back("cannot open spec file: " + *f.spec_path);
    } else {
      try {
        nlohmann::json j;
        in >> j;
        spec = gate::spec_from_json(j, problems);
      } catch (const nlohmann::json::exception& e) {
        problems.push_back(std::string("spec file is not valid json: ") + e.what());
      }
    }
  }
  if (f.case_no) spec.dataset.case_no = *f.case_no;
  if (f.manifest) spec.dataset.manifest = *f.manifest;
  if (f.n_total) spec.dataset.n_total = *f.n_total;
  if (f.n_features) spec.dataset.n_features = *f.n_features;
  if (f.test_size) spec.dataset.test_size = *f.test_size;
  if (f.mu_mode) spec.dataset.mu_mode = *f.mu_mode;
  if (f.reps) spec.replications = *f.reps;
  if (f.seed) spec.seed = *f.seed;
  if (f.out_dir) spec.output_dir = *f.out_dir;
  if (f.threads) spec.threads = *f.threads;
  if (f.baselines) spec.baselines = *f.baselines;
  if (f.n0) spec.gate.n0 = *f.n0;
  if (f.n_q) spec.gate.n_q = *f.n_q;
  if (f.h) spec.gate.h = *f.h;
  if (f.alpha) spec.gate.alpha = *f.alpha;
  if (f.epsilon) spec.gate.epsilon = *f.epsilon;
  if (f.max_vars) spec.gate.max_vars = *f.max_vars;
  if (f.irls_tol) spec.gate.irls.tol = *f.irls_tol;
  if (f.irls_max_iter) spec.gate.irls.max_iter = *f.irls_max_iter;
  return spec;
}

int report_problems(const std::vector<std::string>& problems) {
  for (const auto& p : problems) std::cerr << "config error: " << p << "\n";
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"greedy active learning for logistic regression classifiers"};
  app.require_subcommand(1);

  Flags run_flags, validate_flags;
  std::string report_dir;

  CLI::App* run_cmd = app.add_subcommand(
      "run", "run the active learning experiment and its baselines");
  add_spec_options(run_cmd, run_flags);

  CLI::App* validate_cmd = app.add_subcommand(
      "validate", "check a spec without running; echo resolved defaults");
  add_spec_options(validate_cmd, validate_flags);

  CLI::App* report_cmd = app.add_subcommand(
      "report", "regenerate summary tables from persisted run records");
  report_cmd->add_option("dir", report_dir, "results directory")->required();

  CLI11_PARSE(app, argc, argv);

  if (report_cmd->parsed()) {
    return gate::write_report(report_dir, std::cout);
  }

  if (validate_cmd->parsed()) {
    std::vector<std::string> problems;
    const gate::ExperimentSpec spec = build_spec(validate_flags, problems);
    const auto violations = gate::validate_spec(spec);
    problems.insert(problems.end(), violations.begin(), violations.end());
    if (!problems.empty()) return report_problems(problems);
    std::cout << gate::spec_to_json(spec).dump(2) << "\n";
    return 0;
  }

  std::vector<std::string> problems;
  const gate::ExperimentSpec spec = build_spec(run_flags, problems);
  const auto violations = gate::validate_spec(spec);
  problems.insert(problems.end(), violations.begin(), violations.end());
  if (!problems.empty()) return report_problems(problems);

  try {
    const gate::ExperimentOutcome outcome = gate::run_experiment(spec, std::cout);
    std::cout << "results written to " << spec.output_dir << "\n";
    if (!outcome.failures.empty()) {
      for (const auto& f : outcome.failures) std::cerr << "failed: " << f << "\n";
      return 1;
    }
    return 0;
  } catch (const gate::InvalidSpec& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
