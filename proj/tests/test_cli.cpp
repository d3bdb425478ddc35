#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(GATE_CLI_PATH) + " " + args + " 2>&1";
  CliResult result;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe))
    result.output.append(buf, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("gate_cli_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

// Small synthetic experiment so CLI round trips stay fast.
std::string tiny_args(const fs::path& out, int reps, int seed, int threads = 1) {
  std::ostringstream os;
  os << "run --case 1 --n-total 400 --n-features 8 --test-size 100"
     << " --n0 20 --n-q 10 --h 15 --reps " << reps << " --seed " << seed
     << " --threads " << threads << " --baselines BCD --out " << out.string();
  return os.str();
}

}  // namespace

TEST_CASE("validate accepts a good configuration and echoes it") {
  const auto r = run_cli("validate --case 2 --reps 5 --seed 3");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"case\": 2") != std::string::npos);
  CHECK(r.output.find("\"n0\": 100") != std::string::npos);    // defaults echoed
  CHECK(r.output.find("\"h\": 200") != std::string::npos);
  CHECK(r.output.find("\"epsilon\": 0.01") != std::string::npos);
}

TEST_CASE("validate rejects a zero epsilon naming the field") {
  const auto r = run_cli("validate --case 1 --epsilon 0");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("epsilon") != std::string::npos);
}

TEST_CASE("validate requires a dataset") {
  const auto r = run_cli("validate --reps 3");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("dataset") != std::string::npos);
}

TEST_CASE("validate rejects a missing manifest path") {
  const auto r = run_cli("validate --dataset /nonexistent/manifest.json");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("not found") != std::string::npos);
}

TEST_CASE("validate reports every violation at once") {
  const auto r = run_cli("validate --case 7 --epsilon 0 --reps 0");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("case") != std::string::npos);
  CHECK(r.output.find("epsilon") != std::string::npos);
  CHECK(r.output.find("replications") != std::string::npos);
}

TEST_CASE("run produces the documented artifacts") {
  TempDir dir("artifacts");
  const auto out = dir.path / "out";
  const auto r = run_cli(tiny_args(out, 2, 7));
  CHECK(r.exit_code == 0);
  for (const char* name :
       {"rep_0.jsonl", "rep_1.jsonl", "aggregate.csv", "varfreq.csv",
        "roc_A.csv", "roc_B.csv", "roc_C.csv", "roc_D.csv", "comparison.txt",
        "timing.csv", "meta.json"}) {
    CAPTURE(name);
    CHECK(fs::exists(out / name));
  }
  const std::string agg = slurp(out / "aggregate.csv");
  CHECK(agg.find("approach,replications,") == 0);
  CHECK(agg.find("\nA,2,") != std::string::npos);
  CHECK(agg.find("\nB,2,") != std::string::npos);
}

TEST_CASE("a single replication is flagged as degenerate in the aggregate") {
  TempDir dir("single");
  const auto out = dir.path / "out";
  const auto r = run_cli(tiny_args(out, 1, 5));
  CHECK(r.exit_code == 0);
  std::ifstream in(out / "aggregate.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.substr(0, 4) == "A,1,");
  CHECK(row.substr(row.size() - 2) == ",1");  // sd_degenerate column
}

TEST_CASE("reruns with one seed are byte-identical; seeds change output") {
  TempDir dir("determinism");
  const auto out1 = dir.path / "a";
  const auto out2 = dir.path / "b";
  const auto out3 = dir.path / "c";
  CHECK(run_cli(tiny_args(out1, 2, 11)).exit_code == 0);
  CHECK(run_cli(tiny_args(out2, 2, 11)).exit_code == 0);
  CHECK(run_cli(tiny_args(out3, 2, 12)).exit_code == 0);
  for (const char* name : {"rep_0.jsonl", "rep_1.jsonl", "aggregate.csv",
                           "varfreq.csv", "roc_A.csv", "comparison.txt"}) {
    CAPTURE(name);
    CHECK(slurp(out1 / name) == slurp(out2 / name));
  }
  CHECK(slurp(out1 / "rep_0.jsonl") != slurp(out3 / "rep_0.jsonl"));
}

TEST_CASE("results are independent of the worker count") {
  TempDir dir("threads");
  const auto seq = dir.path / "seq";
  const auto par = dir.path / "par";
  CHECK(run_cli(tiny_args(seq, 4, 13, 1)).exit_code == 0);
  CHECK(run_cli(tiny_args(par, 4, 13, 4)).exit_code == 0);
  for (int k = 0; k < 4; ++k) {
    const std::string name = "rep_" + std::to_string(k) + ".jsonl";
    CAPTURE(name);
    CHECK(slurp(seq / name) == slurp(par / name));
  }
  CHECK(slurp(seq / "aggregate.csv") == slurp(par / "aggregate.csv"));
}

TEST_CASE("report regenerates the same tables it finds") {
  TempDir dir("report");
  const auto out = dir.path / "out";
  CHECK(run_cli(tiny_args(out, 2, 17)).exit_code == 0);
  const std::string agg_before = slurp(out / "aggregate.csv");
  const std::string cmp_before = slurp(out / "comparison.txt");
  const std::string freq_before = slurp(out / "varfreq.csv");

  const auto r = run_cli("report " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(slurp(out / "aggregate.csv") == agg_before);
  CHECK(slurp(out / "comparison.txt") == cmp_before);
  CHECK(slurp(out / "varfreq.csv") == freq_before);
}

TEST_CASE("report rejects an empty directory") {
  TempDir dir("empty");
  const auto r = run_cli("report " + dir.path.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("no results") != std::string::npos);
}

TEST_CASE("report names the corrupt record") {
  TempDir dir("corrupt");
  const auto out = dir.path / "out";
  CHECK(run_cli(tiny_args(out, 2, 19)).exit_code == 0);

  // Damage the second line of rep_1.jsonl.
  const auto victim = out / "rep_1.jsonl";
  std::string content = slurp(victim);
  const auto first_newline = content.find('\n');
  REQUIRE(first_newline != std::string::npos);
  content.insert(first_newline + 1, "{broken json");
  std::ofstream(victim, std::ios::binary) << content;

  const auto r = run_cli("report " + out.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("rep_1.jsonl") != std::string::npos);
  CHECK(r.output.find("line 2") != std::string::npos);
}

TEST_CASE("report rejects records from an unknown schema version") {
  TempDir dir("version");
  const auto out = dir.path / "out";
  fs::create_directories(out);
  std::ofstream(out / "rep_0.jsonl")
      << "{\"schema_version\":99,\"replication\":0,\"approach\":\"A\"}\n";
  const auto r = run_cli("report " + out.string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("schema version") != std::string::npos);
}

TEST_CASE("run refuses an invalid configuration with exit code 2") {
  const auto r = run_cli("run --case 1 --reps 0");
  CHECK(r.exit_code == 2);
}

TEST_CASE("csv manifest datasets run end to end") {
  TempDir dir("csvmode");
  const auto out = dir.path / "out";
  const std::string manifest = (dir.path / "manifest.json").string();
  std::ofstream(manifest) << "{\n"
                          << "  \"path\": \"" << GATE_FIXTURE_DIR
                          << "/wave_mini.csv\",\n"
                          << "  \"label_column\": \"class\",\n"
                          << "  \"label_values\": [\"1\", \"2\"],\n"
                          << "  \"intercept\": \"add\",\n"
                          << "  \"split\": {\"type\": \"first_n\", \"train\": 150}\n"
                          << "}\n";
  const auto r = run_cli("run --dataset " + manifest +
                         " --n0 30 --n-q 10 --h 15 --reps 2 --seed 3"
                         " --baselines BD --out " + out.string());
  CAPTURE(r.output);
  CHECK(r.exit_code == 0);
  CHECK(fs::exists(out / "rep_1.jsonl"));

  // No generating truth: records carry no selection metrics, and the
  // aggregate leaves those cells empty.
  const std::string rec = slurp(out / "rep_0.jsonl");
  CHECK(rec.find("\"tpr\"") == std::string::npos);
  std::ifstream in(out / "aggregate.csv");
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(row.find(",,") != std::string::npos);

  // Uneven feature scales in this fixture should trip the grafting warning.
  CHECK(r.output.find("scale-sensitive") != std::string::npos);
}
