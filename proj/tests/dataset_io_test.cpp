#include "dmfit/dataset_io.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>
#include <sstream>

#include "dmfit/errors.hpp"
#include "test_support.hpp"

namespace dmfit {
namespace {

CountMatrix dense(const std::string& text) {
  std::istringstream in(text);
  return read_dense(in);
}

CountMatrix sparse(const std::string& text) {
  std::istringstream in(text);
  return read_sparse(in);
}

std::size_t parse_error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.line();
  }
  ADD_FAILURE() << "no ParseError";
  return 0;
}

TEST(ReadDense, AcceptsSpacesCommasCommentsAndBlankLines) {
  const auto m = dense("# header\n3 1\n\n0,2\n  4\t 5 \r\n");
  EXPECT_EQ(m, testing::to_matrix({{3, 1}, {0, 2}, {4, 5}}, 2));
}

TEST(ReadDense, ErrorsNameTheLine) {
  EXPECT_EQ(parse_error_line([] { dense("1 2 3\n4 5 6\n7 8\n"); }), 3u);
  EXPECT_EQ(parse_error_line([] { dense("1 2\n# c\n4 -5\n"); }), 3u);
  EXPECT_EQ(parse_error_line([] { dense("1 2\n1 x\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { dense("1.5 2\n"); }), 1u);
  EXPECT_EQ(parse_error_line([] { dense("99999999999999999999 1\n"); }), 1u);
  EXPECT_THROW(dense("# only a comment\n"), ParseError);
}

TEST(ReadDense, ErrorMessageCarriesLinePrefix) {
  try {
    dense("1 2\n3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("line 2: ", 0), 0u) << e.what();
  }
}

TEST(ReadSparse, ParsesPairsAndEmptyRows) {
  const auto m = sparse("K 3\n0:3 2:1\n\n1:2\n");
  EXPECT_EQ(m, testing::to_matrix({{3, 0, 1}, {0, 0, 0}, {0, 2, 0}}, 3));
}

TEST(ReadSparse, ErrorsNameTheLine) {
  EXPECT_EQ(parse_error_line([] { sparse("0:1\n"); }), 1u);
  EXPECT_EQ(parse_error_line([] { sparse("K 2\n0:1\n2:1\n"); }), 3u);
  EXPECT_EQ(parse_error_line([] { sparse("K 2\n0:1 0:2\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { sparse("K 2\n0:1 1\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { sparse("K 2\n1:-1\n"); }), 2u);
  EXPECT_EQ(parse_error_line([] { sparse("K 0\n"); }), 1u);
}

TEST(FormatRoundTrip, DenseAndSparseAreLossless) {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t k = 1 + trial % 7;
    const auto m = testing::to_matrix(testing::random_rows(gen, 40, k, 12, 0.2), k);
    std::stringstream d;
    write_dense(d, m);
    std::stringstream s;
    write_sparse(s, m);
    const auto from_sparse = read_sparse(s);
    EXPECT_EQ(from_sparse, m);
    std::stringstream d2;
    write_sparse(d2, read_dense(d));
    std::stringstream back;
    write_dense(back, read_sparse(d2));
    EXPECT_EQ(read_dense(back), m);
  }
}

TEST(DetectFormat, UsesFirstMeaningfulLine) {
  const auto detect = [](const std::string& text) {
    std::istringstream in(text);
    return detect_format(in);
  };
  EXPECT_EQ(detect("# c\nK 4\n0:1\n"), DatasetFormat::kSparse);
  EXPECT_EQ(detect("\n1 2\n"), DatasetFormat::kDense);
  EXPECT_EQ(detect("DMSTATS 1\n2 1 1 1\n"), DatasetFormat::kStats);
}

TEST(ReadDataset, AutoDispatchesByContent) {
  std::istringstream sparse_in("K 2\n0:1 1:1\n");
  EXPECT_TRUE(std::holds_alternative<CountMatrix>(read_dataset(sparse_in, DatasetFormat::kAuto)));

  const auto stats = build_compressed(testing::to_matrix({{3, 1}, {0, 2}}, 2));
  std::stringstream stats_text;
  write_stats(stats_text, stats);
  const auto loaded = read_dataset(stats_text, DatasetFormat::kAuto);
  ASSERT_TRUE(std::holds_alternative<CompressedStats>(loaded));
  EXPECT_EQ(std::get<CompressedStats>(loaded), stats);

  std::istringstream prob_in("0.25 0.75\n0.5,0.5\n");
  const auto probs = read_dataset(prob_in, DatasetFormat::kProb);
  ASSERT_TRUE(std::holds_alternative<ProbabilityMatrix>(probs));
  EXPECT_EQ(std::get<ProbabilityMatrix>(probs).rows(), 2u);
}

TEST(ReadProb, RejectsOffSimplexRowsWithLine) {
  const auto read = [](const std::string& text) {
    std::istringstream in(text);
    read_prob(in);
  };
  EXPECT_EQ(parse_error_line([&] { read("0.5 0.5\n0.5 0.6\n"); }), 2u);
  EXPECT_EQ(parse_error_line([&] { read("0.5 0.5\n1\n"); }), 2u);
  EXPECT_EQ(parse_error_line([&] { read("0 1\n"); }), 1u);
}

TEST(FormatNames, RoundTrip) {
  for (auto f : {DatasetFormat::kAuto, DatasetFormat::kDense, DatasetFormat::kSparse,
                 DatasetFormat::kStats, DatasetFormat::kProb}) {
    EXPECT_EQ(parse_format(format_name(f)), f);
  }
  EXPECT_FALSE(parse_format("csv").has_value());
}

TEST(WriteReport, SchemaAndPrecision) {
  SolverReport report{DirichletParams({0.1, 3.0}), 7, 1.25e-11, true, -12.5, {0.5, 0.25},
                      Method::kNewtonCompressed};
  ReportContext context{"newton-compressed", DatasetFormat::kDense, 2, 10, 9, 4};
  std::ostringstream out;
  write_report(out, context, report);
  EXPECT_EQ(out.str(),
            "dmfit-report 1\n"
            "method: newton-compressed\n"
            "input_format: dense\n"
            "K: 2\n"
            "N: 10\n"
            "N_effective: 9\n"
            "M: 4\n"
            "converged: true\n"
            "iterations: 7\n"
            "final_grad_norm: 1.25e-11\n"
            "objective: -12.5\n"
            "alpha_hat: 0.10000000000000001,3\n"
            "precompute_seconds: 0.5\n"
            "solve_seconds: 0.25\n");
}

TEST(WriteReport, OmitsMaxTotalForProbabilityData) {
  SolverReport report{DirichletParams({1.0, 2.0}), 3, 0.0, false, 1.0, {}, Method::kNewtonCompressed};
  ReportContext context{"dirichlet-newton", DatasetFormat::kProb, 2, 5, 5, std::nullopt};
  std::ostringstream out;
  write_report(out, context, report);
  EXPECT_EQ(out.str().find("\nM: "), std::string::npos);
  EXPECT_NE(out.str().find("converged: false\n"), std::string::npos);
}

}  // namespace
}  // namespace dmfit
