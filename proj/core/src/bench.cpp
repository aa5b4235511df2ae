#include "dmfit/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

#include "dmfit/dm_solver.hpp"
#include "dmfit/errors.hpp"
#include "dmfit/sampling.hpp"

namespace dmfit {

std::string_view sweep_name(SweepVariable sweep) {
  switch (sweep) {
    case SweepVariable::kN: return "N";
    case SweepVariable::kM: return "M";
    case SweepVariable::kK: return "K";
  }
  return "?";
}

std::optional<SweepVariable> parse_sweep(std::string_view name) {
  if (name == "N") return SweepVariable::kN;
  if (name == "M") return SweepVariable::kM;
  if (name == "K") return SweepVariable::kK;
  return std::nullopt;
}

std::vector<std::int64_t> sweep_points(std::int64_t from, std::int64_t to, double factor) {
  if (from < 1 || to < from) throw std::invalid_argument("sweep: need 1 <= from <= to");
  if (!(factor > 1.0) && from != to) throw std::invalid_argument("sweep: factor must be > 1");
  std::vector<std::int64_t> out;
  for (double x = static_cast<double>(from); x <= static_cast<double>(to) * (1.0 + 1e-12);
       x *= factor) {
    const auto point = static_cast<std::int64_t>(std::llround(x));
    if (out.empty() || out.back() != point) out.push_back(point);
    if (from == to) break;
  }
  return out;
}

namespace {

struct Timed {
  double precompute = 0.0;
  double solve = 0.0;
};

// Ingestion is timed over a pool of distinct same-shape datasets holding at
// least this many cells. Re-reading one small input lets the branch predictor
// learn it, which understates the cost of a single pass.
constexpr std::size_t kPoolCells = std::size_t{1} << 18;

std::vector<CountMatrix> dataset_pool(const SynthSpec& spec) {
  const std::size_t cells = std::max<std::size_t>(1, spec.rows * spec.alpha.size());
  const std::size_t copies = (kPoolCells + cells - 1) / cells;
  std::vector<CountMatrix> pool;
  pool.push_back(synthesize(spec));
  for (std::size_t c = 1; c < copies; ++c) {
    SynthSpec other = spec;
    other.seed = mix64(spec.seed + c);
    pool.push_back(synthesize(other));
  }
  return pool;
}

double elapsed(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

constexpr int kMaxRuns = 1'000'000;

// Compressed methods: the build cycles through the pool; the solve phase runs
// back to back on one set of statistics so it is not charged for cache misses
// caused by the preceding build.
Timed timed_compressed(const std::vector<CountMatrix>& pool, const CompressedStats& stats,
                       const SolverConfig& solver, double min_seconds) {
  Timed out;
  double spent = 0.0;
  int runs = 0;
  do {
    const auto start = std::chrono::steady_clock::now();
    (void)build_compressed(pool[static_cast<std::size_t>(runs) % pool.size()]);
    spent += elapsed(start);
    ++runs;
  } while (spent < min_seconds && runs < kMaxRuns);
  out.precompute = spent / runs;

  spent = 0.0;
  runs = 0;
  do {
    spent += fit_dm(stats, solver).timings.solve_seconds;
    ++runs;
  } while (spent < min_seconds && runs < kMaxRuns);
  out.solve = spent / runs;
  return out;
}

// Naive methods rescan the data every iteration, so both phases come from the
// same fits, cycling through the pool.
Timed timed_naive(const std::vector<CountMatrix>& pool, const SolverConfig& solver,
                  double min_seconds) {
  Timed out;
  double spent = 0.0;
  int runs = 0;
  do {
    const SolverReport r = fit_dm(pool[static_cast<std::size_t>(runs) % pool.size()], solver);
    out.precompute += r.timings.precompute_seconds;
    out.solve += r.timings.solve_seconds;
    spent += r.timings.total_seconds();
    ++runs;
  } while (spent < min_seconds && runs < kMaxRuns);
  out.precompute /= runs;
  out.solve /= runs;
  return out;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

SynthSpec spec_for_point(const BenchConfig& config, std::int64_t value) {
  std::vector<double> alpha = config.alpha;
  std::size_t rows = config.rows;
  std::int64_t total = config.row_total;
  switch (config.sweep) {
    case SweepVariable::kN:
      rows = static_cast<std::size_t>(value);
      break;
    case SweepVariable::kM:
      total = value;
      break;
    case SweepVariable::kK:
      alpha.assign(static_cast<std::size_t>(value), 1.0 / static_cast<double>(value));
      break;
  }
  const std::uint64_t seed = mix64(config.seed ^ mix64(static_cast<std::uint64_t>(value)));
  return SynthSpec{DirichletParams(std::move(alpha)), rows, RowTotalSpec::fixed(total), seed};
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchConfig& config) {
  if (config.repeats < 1) throw std::invalid_argument("bench: repeats must be >= 1");
  std::vector<BenchRow> rows;
  for (const std::int64_t value : config.points) {
    const std::vector<CountMatrix> pool = dataset_pool(spec_for_point(config, value));
    const CompressedStats stats = build_compressed(pool.front());
    for (const Method method : config.methods) {
      BenchRow row;
      row.sweep = std::string(sweep_name(config.sweep));
      row.value = value;
      row.method = std::string(method_name(method));
      SolverConfig solver = config.solver;
      solver.method = method;
      try {
        const SolverReport first = fit_dm(pool.front(), solver);  // warm-up, not timed
        row.iterations = first.iterations;
        row.converged = first.converged;
        std::vector<double> pre;
        std::vector<double> sol;
        for (int r = 0; r < config.repeats; ++r) {
          const Timed t = is_compressed(method)
                              ? timed_compressed(pool, stats, solver, config.min_batch_seconds)
                              : timed_naive(pool, solver, config.min_batch_seconds);
          pre.push_back(t.precompute);
          sol.push_back(t.solve);
        }
        row.precompute_seconds = median(pre);
        row.solve_seconds = median(sol);
        row.total_seconds = row.precompute_seconds + row.solve_seconds;
      } catch (const FitError&) {
        row.converged = false;
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
  out << kBenchCsvHeader << '\n';
  const auto old_flags = out.flags();
  const auto old_precision = out.precision();
  out << std::setprecision(6);
  for (const auto& r : rows) {
    out << r.sweep << ',' << r.value << ',' << r.method << ',' << r.precompute_seconds << ','
        << r.solve_seconds << ',' << r.total_seconds << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << '\n';
  }
  out.flags(old_flags);
  out.precision(old_precision);
}

}  // namespace dmfit
