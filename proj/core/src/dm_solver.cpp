#include "dmfit/dm_solver.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "dmfit/errors.hpp"
#include "dmfit/special_functions.hpp"

namespace dmfit {

namespace {

// Neumaier-compensated running sum. The gradient is a difference of two sums
// that each grow with N, so plain accumulation would put the rounding floor
// above small tolerances on large datasets.
template <typename T>
class BasicCompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  T value() const { return sum_ + carry_; }

 private:
  T sum_ = 0;
  T carry_ = 0;
};

using CompensatedSum = BasicCompensatedSum<double>;

// The compressed sums have only O(MK) terms but each term scales with N, so a
// single rounded division already costs ~N * 1e-16. They are evaluated in
// long double, which carries 11 extra bits on x86-64 and equals double where
// the platform has no wider type.
using Wide = long double;
using WideSum = BasicCompensatedSum<Wide>;

Wide wide_shift(double a, std::size_t m) { return static_cast<Wide>(a) + static_cast<Wide>(m); }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double total_of(std::span<const double> alpha) {
  return std::accumulate(alpha.begin(), alpha.end(), 0.0);
}

void check_alpha(std::span<const double> alpha, std::size_t categories, const char* where) {
  if (alpha.size() != categories) {
    throw DimensionError(std::string(where) + ": alpha has " + std::to_string(alpha.size()) +
                         " entries, data has " + std::to_string(categories) + " categories");
  }
  for (double a : alpha) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DomainError(std::string(where) + ": alpha entries must be finite and > 0");
    }
  }
}

// Column totals and the number of rows with a positive total.
struct DataSummary {
  std::vector<Count> column_totals;
  std::uint64_t effective_rows = 0;
};

DataSummary summarize(const CountMatrix& data) {
  DataSummary out;
  out.column_totals.assign(data.categories(), 0);
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    Count total = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      out.column_totals[k] += row[k];
      total += row[k];
    }
    if (total > 0) ++out.effective_rows;
  }
  return out;
}

void check_fit_preconditions(std::size_t categories, std::uint64_t effective_rows,
                             const std::vector<Count>& column_totals) {
  if (categories < 2) {
    throw DimensionError("fit_dm: need at least two categories");
  }
  if (effective_rows == 0) {
    throw EmptyDataError("fit_dm: no row has a positive total");
  }
  for (std::size_t k = 0; k < column_totals.size(); ++k) {
    if (column_totals[k] == 0) {
      throw DegenerateDataError("fit_dm: category " + std::to_string(k) +
                                " is never observed; its MLE is alpha_k -> 0");
    }
  }
}

}  // namespace

double dm_log_prob(const DirichletParams& alpha, std::span<const Count> counts) {
  if (counts.size() != alpha.size()) {
    throw DimensionError("dm_log_prob: counts and alpha differ in length");
  }
  Count n = 0;
  double out = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < 0) throw DomainError("dm_log_prob: negative count");
    n += counts[k];
    out += dual_log_gamma(alpha[k], counts[k]) - dual_log_gamma(1.0, counts[k]);
  }
  return out - dual_log_gamma(alpha.sum(), n) + dual_log_gamma(1.0, n);
}

double dm_objective_naive(const CountMatrix& data, std::span<const double> alpha) {
  check_alpha(alpha, data.categories(), "dm_objective_naive");
  const double alpha_total = total_of(alpha);
  CompensatedSum out;
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    Count total = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] == 0) continue;
      out.add(dual_log_gamma(alpha[k], row[k]));
      total += row[k];
    }
    if (total > 0) out.add(-dual_log_gamma(alpha_total, total));
  }
  return out.value();
}

double dm_objective_compressed(const CompressedStats& stats, std::span<const double> alpha) {
  check_alpha(alpha, stats.categories(), "dm_objective_compressed");
  const std::size_t big_m = stats.max_total();
  WideSum out;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const auto u = stats.u(k);
    for (std::size_t m = 0; m < big_m && u[m] > 0; ++m) {
      out.add(static_cast<Wide>(u[m]) * std::log(wide_shift(alpha[k], m)));
    }
  }
  const double alpha_total = total_of(alpha);
  const auto v = stats.v();
  for (std::size_t m = 0; m < big_m; ++m) {
    out.add(-static_cast<Wide>(v[m]) * std::log(wide_shift(alpha_total, m)));
  }
  return static_cast<double>(out.value());
}

std::vector<double> dm_gradient_compressed(const CompressedStats& stats,
                                           std::span<const double> alpha) {
  check_alpha(alpha, stats.categories(), "dm_gradient_compressed");
  const std::size_t big_m = stats.max_total();
  const double alpha_total = total_of(alpha);
  WideSum shared;
  const auto v = stats.v();
  for (std::size_t m = 0; m < big_m; ++m) {
    shared.add(static_cast<Wide>(v[m]) / wide_shift(alpha_total, m));
  }
  std::vector<double> g(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const auto u = stats.u(k);
    WideSum term;
    for (std::size_t m = 0; m < big_m && u[m] > 0; ++m) {
      term.add(static_cast<Wide>(u[m]) / wide_shift(alpha[k], m));
    }
    term.add(-shared.value());
    g[k] = static_cast<double>(term.value());
  }
  return g;
}

StructuredHessian dm_hessian_compressed(const CompressedStats& stats,
                                        std::span<const double> alpha) {
  check_alpha(alpha, stats.categories(), "dm_hessian_compressed");
  const std::size_t big_m = stats.max_total();
  const double alpha_total = total_of(alpha);
  StructuredHessian h;
  WideSum c;
  const auto v = stats.v();
  for (std::size_t m = 0; m < big_m; ++m) {
    const Wide x = wide_shift(alpha_total, m);
    c.add(static_cast<Wide>(v[m]) / (x * x));
  }
  h.constant = static_cast<double>(c.value());
  h.diag.resize(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const auto u = stats.u(k);
    WideSum d;
    for (std::size_t m = 0; m < big_m && u[m] > 0; ++m) {
      const Wide x = wide_shift(alpha[k], m);
      d.add(static_cast<Wide>(u[m]) / (x * x));
    }
    h.diag[k] = -static_cast<double>(d.value());
  }
  return h;
}

std::vector<double> dm_gradient_naive(const CountMatrix& data, std::span<const double> alpha) {
  check_alpha(alpha, data.categories(), "dm_gradient_naive");
  const std::size_t k_count = alpha.size();
  const double alpha_total = total_of(alpha);
  std::vector<double> psi_alpha(k_count);
  for (std::size_t k = 0; k < k_count; ++k) psi_alpha[k] = digamma(alpha[k]);
  const double psi_total = digamma(alpha_total);

  std::vector<CompensatedSum> sums(k_count);
  CompensatedSum shared;
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    Count total = 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (row[k] == 0) continue;
      sums[k].add(digamma(alpha[k] + static_cast<double>(row[k])) - psi_alpha[k]);
      total += row[k];
    }
    if (total > 0) shared.add(digamma(alpha_total + static_cast<double>(total)) - psi_total);
  }
  std::vector<double> g(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    sums[k].add(-shared.value());
    g[k] = sums[k].value();
  }
  return g;
}

StructuredHessian dm_hessian_naive(const CountMatrix& data, std::span<const double> alpha) {
  check_alpha(alpha, data.categories(), "dm_hessian_naive");
  const std::size_t k_count = alpha.size();
  const double alpha_total = total_of(alpha);
  std::vector<double> tri_alpha(k_count);
  for (std::size_t k = 0; k < k_count; ++k) tri_alpha[k] = trigamma(alpha[k]);
  const double tri_total = trigamma(alpha_total);

  std::vector<CompensatedSum> diag(k_count);
  CompensatedSum shared;
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    Count total = 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (row[k] == 0) continue;
      diag[k].add(trigamma(alpha[k] + static_cast<double>(row[k])) - tri_alpha[k]);
      total += row[k];
    }
    if (total > 0) shared.add(trigamma(alpha_total + static_cast<double>(total)) - tri_total);
  }
  StructuredHessian h;
  h.constant = -shared.value();
  h.diag.resize(k_count);
  for (std::size_t k = 0; k < k_count; ++k) h.diag[k] = diag[k].value();
  return h;
}

std::vector<double> fp_step_compressed(const CompressedStats& stats,
                                       std::span<const double> alpha) {
  check_alpha(alpha, stats.categories(), "fp_step_compressed");
  const std::size_t big_m = stats.max_total();
  const double alpha_total = total_of(alpha);
  WideSum denom;
  const auto v = stats.v();
  for (std::size_t m = 0; m < big_m; ++m) {
    denom.add(static_cast<Wide>(v[m]) / wide_shift(alpha_total, m));
  }
  if (!(denom.value() > 0)) {
    throw DegenerateDataError("fp_step_compressed: denominator vanishes (no counts)");
  }
  std::vector<double> next(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    const auto u = stats.u(k);
    WideSum num;
    for (std::size_t m = 0; m < big_m && u[m] > 0; ++m) {
      num.add(static_cast<Wide>(u[m]) / wide_shift(alpha[k], m));
    }
    next[k] = static_cast<double>(static_cast<Wide>(alpha[k]) * num.value() / denom.value());
  }
  return next;
}

std::vector<double> fp_step_naive(const CountMatrix& data, std::span<const double> alpha) {
  check_alpha(alpha, data.categories(), "fp_step_naive");
  const std::size_t k_count = alpha.size();
  const double alpha_total = total_of(alpha);
  std::vector<double> psi_alpha(k_count);
  for (std::size_t k = 0; k < k_count; ++k) psi_alpha[k] = digamma(alpha[k]);
  const double psi_total = digamma(alpha_total);

  std::vector<CompensatedSum> num(k_count);
  CompensatedSum denom;
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    Count total = 0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (row[k] == 0) continue;
      num[k].add(digamma(alpha[k] + static_cast<double>(row[k])) - psi_alpha[k]);
      total += row[k];
    }
    if (total > 0) denom.add(digamma(alpha_total + static_cast<double>(total)) - psi_total);
  }
  if (!(denom.value() > 0.0)) {
    throw DegenerateDataError("fp_step_naive: denominator vanishes (no counts)");
  }
  std::vector<double> next(k_count);
  for (std::size_t k = 0; k < k_count; ++k) {
    next[k] = alpha[k] * num[k].value() / denom.value();
  }
  return next;
}

SolverReport fit_dm(const CompressedStats& stats, const SolverConfig& config) {
  if (!is_compressed(config.method)) {
    throw std::invalid_argument("fit_dm: method " + std::string(method_name(config.method)) +
                                " needs the raw rows, not compressed stats");
  }
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  std::vector<Count> column_totals(stats.categories(), 0);
  for (std::size_t k = 0; k < stats.categories(); ++k) {
    column_totals[k] = stats.max_total() > 0 ? stats.u(k)[0] : 0;
  }
  check_fit_preconditions(stats.categories(), stats.effective_rows(), column_totals);

  ConcaveProblem problem;
  problem.objective = [&stats](std::span<const double> a) {
    return dm_objective_compressed(stats, a);
  };
  problem.gradient = [&stats](std::span<const double> a) {
    return dm_gradient_compressed(stats, a);
  };
  problem.hessian = [&stats](std::span<const double> a) {
    return dm_hessian_compressed(stats, a);
  };
  problem.fallback = [&stats](std::span<const double> a) { return fp_step_compressed(stats, a); };

  std::vector<double> init = config.initial_alpha(stats.categories());
  SolverReport report = config.method == Method::kNewtonCompressed
                            ? maximize_newton(problem, std::move(init), config)
                            : iterate_fixed_point(problem, std::move(init), config);
  report.timings.solve_seconds = seconds_since(start);
  return report;
}

SolverReport fit_dm(const CountMatrix& data, const SolverConfig& config) {
  config.validate();
  if (is_compressed(config.method)) {
    const auto start = std::chrono::steady_clock::now();
    const CompressedStats stats = build_compressed(data);
    const double precompute = seconds_since(start);
    SolverReport report = fit_dm(stats, config);
    report.timings.precompute_seconds = precompute;
    return report;
  }

  const auto start = std::chrono::steady_clock::now();
  const DataSummary summary = summarize(data);
  check_fit_preconditions(data.categories(), summary.effective_rows, summary.column_totals);
  const double precompute = seconds_since(start);

  const auto solve_start = std::chrono::steady_clock::now();
  ConcaveProblem problem;
  problem.objective = [&data](std::span<const double> a) { return dm_objective_naive(data, a); };
  problem.gradient = [&data](std::span<const double> a) { return dm_gradient_naive(data, a); };
  problem.hessian = [&data](std::span<const double> a) { return dm_hessian_naive(data, a); };
  problem.fallback = [&data](std::span<const double> a) { return fp_step_naive(data, a); };

  std::vector<double> init = config.initial_alpha(data.categories());
  SolverReport report = config.method == Method::kNewtonNaive
                            ? maximize_newton(problem, std::move(init), config)
                            : iterate_fixed_point(problem, std::move(init), config);
  report.timings.precompute_seconds = precompute;
  report.timings.solve_seconds = seconds_since(solve_start);
  return report;
}

}  // namespace dmfit
