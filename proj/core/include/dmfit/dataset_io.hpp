#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "dmfit/compressed_stats.hpp"
#include "dmfit/dirichlet.hpp"
#include "dmfit/solver.hpp"

namespace dmfit {

// dense:  one row per line, K non-negative integers separated by whitespace
//         and/or commas. Blank lines and lines starting with '#' are skipped.
// sparse: first line "K <value>", then one row per line as whitespace
//         separated "index:count" pairs; an empty line is an all-zero row.
//         Lines starting with '#' are skipped.
// stats:  the CompressedStats text format (see write_stats).
// prob:   dense layout with real-valued simplex points (pure Dirichlet data).
enum class DatasetFormat { kAuto, kDense, kSparse, kStats, kProb };

std::string_view format_name(DatasetFormat format);
std::optional<DatasetFormat> parse_format(std::string_view name);

// All readers throw ParseError naming the 1-based line of the first problem.
CountMatrix read_dense(std::istream& in);
CountMatrix read_sparse(std::istream& in);
ProbabilityMatrix read_prob(std::istream& in);

void write_dense(std::ostream& out, const CountMatrix& data);
void write_sparse(std::ostream& out, const CountMatrix& data);

using Dataset = std::variant<CountMatrix, CompressedStats, ProbabilityMatrix>;

// kAuto picks stats when the first meaningful line starts with the stats
// magic, sparse when it is "K <value>", dense otherwise. Probability data is
// never auto-detected.
DatasetFormat detect_format(std::istream& in);
Dataset read_dataset(std::istream& in, DatasetFormat format);

// Throws std::runtime_error if the file cannot be opened.
Dataset load_dataset(const std::string& path, DatasetFormat format);

// Key-value fit report. Line 1 is "dmfit-report 1"; each following line is
// "key: value" in this order:
//   method, input_format, K, N, N_effective, M (count data only), converged,
//   iterations, final_grad_norm, objective, alpha_hat (comma separated),
//   precompute_seconds, solve_seconds
struct ReportContext {
  std::string method;
  DatasetFormat input_format = DatasetFormat::kDense;
  std::size_t categories = 0;
  std::uint64_t rows = 0;
  std::uint64_t effective_rows = 0;
  std::optional<std::size_t> max_total;
};

inline constexpr const char* kReportMagic = "dmfit-report 1";

void write_report(std::ostream& out, const ReportContext& context, const SolverReport& report);

}  // namespace dmfit
