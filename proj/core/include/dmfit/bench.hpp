#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dmfit/solver.hpp"

namespace dmfit {

enum class SweepVariable { kN, kM, kK };

std::string_view sweep_name(SweepVariable sweep);
std::optional<SweepVariable> parse_sweep(std::string_view name);

// Sweep points from, from*factor, ... while <= to (rounded to integers,
// duplicates dropped).
std::vector<std::int64_t> sweep_points(std::int64_t from, std::int64_t to, double factor);

struct BenchConfig {
  SweepVariable sweep = SweepVariable::kN;
  std::vector<std::int64_t> points;
  std::vector<Method> methods{Method::kNewtonCompressed, Method::kFixedPointNaive};

  // Values held fixed while the sweep variable moves.
  std::size_t rows = 5000;          // N
  std::int64_t row_total = 10;      // M
  // Dirichlet parameter for N and M sweeps; the K sweep uses alpha_k = 1/K.
  std::vector<double> alpha{3.0, 1.0, 2.0};

  std::uint64_t seed = 1;
  int repeats = 3;                  // median over this many timed batches
  double min_batch_seconds = 0.02;  // each phase is repeated until this long
  SolverConfig solver;
};

struct BenchRow {
  std::string sweep;
  std::int64_t value = 0;
  std::string method;
  double precompute_seconds = 0.0;
  double solve_seconds = 0.0;
  double total_seconds = 0.0;  // precompute_seconds + solve_seconds
  int iterations = 0;
  bool converged = false;
};

// One row per (sweep point, method). Each point's dataset is synthesized from
// a seed derived from (seed, point value), so rows are reproducible. A warm-up
// fit precedes the timed batches. Fit failures yield converged = false with
// zero timings rather than an exception.
std::vector<BenchRow> run_bench(const BenchConfig& config);

inline constexpr const char* kBenchCsvHeader =
    "sweep,value,method,precompute_seconds,solve_seconds,total_seconds,iterations,converged";

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

}  // namespace dmfit
