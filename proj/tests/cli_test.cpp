// End-to-end tests of the dmfit executable.

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string data_path(const std::string& name) { return std::string(DMFIT_TEST_DATA_DIR) + "/" + name; }

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("dmfit_cli_" + std::string(info->name()) + "_" +
                                        std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path tmp(const std::string& name) const { return dir_ / name; }

  RunResult run(const std::string& args) const {
    const auto err_path = dir_ / "stderr.txt";
    const std::string command =
        std::string("'") + DMFIT_CLI_PATH + "' " + args + " 2>'" + err_path.string() + "'";
    RunResult result;
    FILE* pipe = ::popen(command.c_str(), "r");
    if (pipe == nullptr) return result;
    char buffer[4096];
    std::size_t n = 0;
    while ((n = std::fread(buffer, 1, sizeof buffer, pipe)) > 0) result.out.append(buffer, n);
    const int status = ::pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.err = read_file(err_path);
    return result;
  }

 private:
  fs::path dir_;
};

using Report = std::vector<std::pair<std::string, std::string>>;

Report parse_report(const std::string& text) {
  Report out;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  out.emplace_back("", line);
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon == std::string::npos) {
      ADD_FAILURE() << "bad report line '" << line << "'";
      continue;
    }
    out.emplace_back(line.substr(0, colon), line.substr(colon + 2));
  }
  return out;
}

std::string field(const Report& r, const std::string& key) {
  for (const auto& [k, v] : r) {
    if (k == key) return v;
  }
  ADD_FAILURE() << "missing key " << key;
  return {};
}

std::vector<double> numbers(const std::string& list) {
  std::vector<double> out;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

void expect_close(const std::vector<double>& a, const std::vector<double>& b, double rel) {
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(a[i], b[i], rel * std::max(1.0, std::fabs(b[i]))) << i;
  }
}

TEST_F(CliTest, FitMatchesGoldenReport) {
  const auto r = run("fit '" + data_path("small_dense.txt") + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto got = parse_report(r.out);
  const auto want = parse_report(read_file(data_path("small_dense.report")));
  ASSERT_EQ(got.size(), want.size()) << r.out;
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(got[i].first, want[i].first);
    const auto& expected = want[i].second;
    if (expected == "*") continue;
    if (want[i].first == "alpha_hat" || want[i].first == "objective") {
      expect_close(numbers(got[i].second), numbers(expected), 1e-9);
    } else {
      EXPECT_EQ(got[i].second, expected) << want[i].first;
    }
  }
  EXPECT_LE(std::stod(field(got, "final_grad_norm")), 1e-10);
  EXPECT_GE(std::stod(field(got, "solve_seconds")), 0.0);
}

TEST_F(CliTest, SparseAndStatsInputsGiveSameFit) {
  const auto dense = parse_report(run("fit '" + data_path("small_dense.txt") + "'").out);
  const auto sparse_run = run("fit --format sparse '" + data_path("small_sparse.txt") + "'");
  ASSERT_EQ(sparse_run.exit_code, 0) << sparse_run.err;
  const auto sparse = parse_report(sparse_run.out);
  const auto stats_run = run("fit '" + data_path("small.stats") + "'");
  ASSERT_EQ(stats_run.exit_code, 0) << stats_run.err;
  const auto stats = parse_report(stats_run.out);
  EXPECT_EQ(field(sparse, "input_format"), "sparse");
  EXPECT_EQ(field(stats, "input_format"), "stats");
  EXPECT_EQ(field(sparse, "alpha_hat"), field(dense, "alpha_hat"));
  EXPECT_EQ(field(stats, "alpha_hat"), field(dense, "alpha_hat"));
  EXPECT_EQ(field(stats, "N_effective"), "11");
}

TEST_F(CliTest, AutoDetectsSparse) {
  const auto r = parse_report(run("fit '" + data_path("small_sparse.txt") + "'").out);
  EXPECT_EQ(field(r, "input_format"), "sparse");
}

TEST_F(CliTest, FixedPointAndNewtonAgree) {
  const auto path = "'" + data_path("small_dense.txt") + "'";
  for (const char* method : {"fp-compressed", "fp-naive", "newton-naive"}) {
    const auto r = run(std::string("fit --method ") + method + " --max-iters 100000 " + path);
    ASSERT_EQ(r.exit_code, 0) << method << r.err;
    const auto report = parse_report(r.out);
    EXPECT_EQ(field(report, "method"), method);
    const auto newton = parse_report(run("fit " + path).out);
    expect_close(numbers(field(report, "alpha_hat")), numbers(field(newton, "alpha_hat")), 1e-6);
  }
}

TEST_F(CliTest, StatsOfSpecExample) {
  write_file(tmp("two.txt"), "3 1\n0 2\n");
  const auto r = run("stats '" + tmp("two.txt").string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "DMSTATS 1\n2 4 2 2\n1 1 1 0\n2 1 0 0\n2 2 1 1\n");
}

TEST_F(CliTest, StatsMatchesIndependentTally) {
  const auto r = run("stats '" + data_path("small_dense.txt") + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, read_file(data_path("small.stats")));
  const auto threaded = run("stats --threads 4 '" + data_path("small_dense.txt") + "'");
  EXPECT_EQ(threaded.out, r.out);
}

TEST_F(CliTest, StatsThenFitEqualsDirectFit) {
  ASSERT_EQ(run("stats '" + data_path("small_dense.txt") + "' -o '" + tmp("s.stats").string() + "'")
                .exit_code,
            0);
  const auto via_stats = parse_report(run("fit '" + tmp("s.stats").string() + "'").out);
  const auto direct = parse_report(run("fit '" + data_path("small_dense.txt") + "'").out);
  EXPECT_EQ(field(via_stats, "alpha_hat"), field(direct, "alpha_hat"));
  EXPECT_EQ(field(via_stats, "objective"), field(direct, "objective"));
}

TEST_F(CliTest, MergingShardStatsEqualsWholeFile) {
  ASSERT_EQ(run("sample --rows 301 --total-range 0:25 --seed 9 -o '" + tmp("all.txt").string() + "'")
                .exit_code,
            0);
  std::istringstream all(read_file(tmp("all.txt")));
  std::ofstream a(tmp("a.txt"));
  std::ofstream b(tmp("b.txt"));
  std::string line;
  for (int i = 0; std::getline(all, line); ++i) (i < 120 ? a : b) << line << '\n';
  a.close();
  b.close();
  const auto whole = run("stats '" + tmp("all.txt").string() + "'").out;
  EXPECT_EQ(run("stats '" + tmp("a.txt").string() + "' '" + tmp("b.txt").string() + "'").out, whole);
  ASSERT_EQ(run("stats '" + tmp("a.txt").string() + "' -o '" + tmp("a.stats").string() + "'").exit_code, 0);
  ASSERT_EQ(run("stats '" + tmp("b.txt").string() + "' -o '" + tmp("b.stats").string() + "'").exit_code, 0);
  EXPECT_EQ(run("stats '" + tmp("b.stats").string() + "' '" + tmp("a.stats").string() + "'").out, whole);
}

TEST_F(CliTest, SampleWritesRequestedShape) {
  const auto r = run("sample --alpha 3,1,2 --rows 100 --total 10 --seed 4");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream fields(line);
    long long x = 0;
    long long sum = 0;
    int k = 0;
    while (fields >> x) {
      sum += x;
      ++k;
    }
    EXPECT_EQ(k, 3);
    EXPECT_EQ(sum, 10);
    ++rows;
  }
  EXPECT_EQ(rows, 100);
  EXPECT_NE(r.err.find("alpha: 3,1,2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("seed: 4"), std::string::npos) << r.err;
  EXPECT_EQ(run("sample --alpha 3,1,2 --rows 100 --total 10 --seed 4").out, r.out);
  EXPECT_NE(run("sample --alpha 3,1,2 --rows 100 --total 10 --seed 5").out, r.out);
  EXPECT_EQ(run("sample --alpha 3,1,2 --rows 100 --total 10 --seed 4 --threads 3").out, r.out);
}

TEST_F(CliTest, SampleZeroTotals) {
  const auto r = run("sample --rows 3 --total 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_EQ(r.out, "0 0 0\n0 0 0\n0 0 0\n");
}

TEST_F(CliTest, SampleEchoGoesToStdoutWhenWritingFile) {
  const auto r = run("sample --rows 5 --format sparse -o '" + tmp("s.txt").string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_NE(r.out.find("format: sparse"), std::string::npos);
  EXPECT_EQ(read_file(tmp("s.txt")).rfind("K 3\n", 0), 0u);
}

TEST_F(CliTest, SampleThenFitRecoversAlpha) {
  ASSERT_EQ(run("sample --alpha 3,1,2 --rows 100000 --total 10 --seed 11 --threads 4 -o '" +
                tmp("big.txt").string() + "'")
                .exit_code,
            0);
  const auto r = run("fit '" + tmp("big.txt").string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto alpha = numbers(field(parse_report(r.out), "alpha_hat"));
  const double truth[] = {3.0, 1.0, 2.0};
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(alpha[k], truth[k], 0.15 * truth[k]);
}

TEST_F(CliTest, FitProbabilityData) {
  write_file(tmp("p.txt"), "0.2 0.3 0.5\n0.5 0.25 0.25\n0.1 0.6 0.3\n0.3 0.3 0.4\n0.6 0.1 0.3\n");
  const auto r = run("fit --format prob --init moments '" + tmp("p.txt").string() + "'");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto report = parse_report(r.out);
  EXPECT_EQ(field(report, "method"), "dirichlet-newton");
  EXPECT_EQ(field(report, "input_format"), "prob");
  for (const auto& [k, v] : report) EXPECT_NE(k, "M");
}

TEST_F(CliTest, MalformedRowNamesLine) {
  const auto r = run("fit '" + data_path("malformed.txt") + "'");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.err.find("line 3"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(CliTest, ExitCodesPartitionOutcomes) {
  EXPECT_EQ(run("").exit_code, 1);
  EXPECT_EQ(run("fit").exit_code, 1);
  EXPECT_EQ(run("fit --method gradient-descent '" + data_path("small_dense.txt") + "'").exit_code, 1);
  EXPECT_EQ(run("--help").exit_code, 0);
  EXPECT_EQ(run("fit '" + tmp("missing.txt").string() + "'").exit_code, 2);
  EXPECT_EQ(run("fit --init 1,1 '" + data_path("small_dense.txt") + "'").exit_code, 2);
  EXPECT_EQ(run("fit --init moments '" + data_path("small_dense.txt") + "'").exit_code, 2);

  const auto limited = run("fit --method fp-compressed --max-iters 2 '" + data_path("small_dense.txt") + "'");
  EXPECT_EQ(limited.exit_code, 3);
  EXPECT_NE(limited.out.find("converged: false"), std::string::npos);

  write_file(tmp("same.txt"), "0.2 0.3 0.5\n0.2 0.3 0.5\n");
  const auto diverged = run("fit --format prob '" + tmp("same.txt").string() + "'");
  EXPECT_EQ(diverged.exit_code, 4);
  EXPECT_NE(diverged.err.find("error"), std::string::npos);

  write_file(tmp("zero_col.txt"), "1 0 2\n3 0 1\n");
  EXPECT_EQ(run("fit '" + tmp("zero_col.txt").string() + "'").exit_code, 5);
  write_file(tmp("zeros.txt"), "0 0\n0 0\n");
  EXPECT_EQ(run("fit '" + tmp("zeros.txt").string() + "'").exit_code, 5);
}

TEST_F(CliTest, BenchSinglePoint) {
  const auto r = run("bench --sweep N --from 200 --to 200 --repeats 1 --min-batch-seconds 0");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u) << r.out;
  EXPECT_EQ(lines[0], "sweep,value,method,precompute_seconds,solve_seconds,total_seconds,iterations,converged");
  EXPECT_EQ(lines[1].rfind("N,200,newton-compressed,", 0), 0u);
  EXPECT_EQ(lines[2].rfind("N,200,fp-naive,", 0), 0u);
}

TEST_F(CliTest, BenchRejectsBadSweep) {
  EXPECT_EQ(run("bench --sweep Q").exit_code, 1);
  EXPECT_EQ(run("bench --from 10 --to 5").exit_code, 2);
}

}  // namespace
