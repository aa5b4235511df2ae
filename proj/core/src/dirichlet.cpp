#include "dmfit/dirichlet.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <string>

#include "dmfit/errors.hpp"
#include "dmfit/special_functions.hpp"

namespace dmfit {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void check_simplex_point(std::span<const double> p, std::size_t categories, const char* where) {
  if (p.size() != categories) {
    throw DimensionError(std::string(where) + ": point has " + std::to_string(p.size()) +
                         " entries, expected " + std::to_string(categories));
  }
  double total = 0.0;
  for (double x : p) {
    if (!(x > 0.0 && x <= 1.0)) {
      throw DomainError(std::string(where) + ": entries must lie in (0, 1], got " +
                        std::to_string(x));
    }
    total += x;
  }
  if (std::fabs(total - 1.0) > kSimplexTolerance) {
    throw DomainError(std::string(where) + ": entries sum to " + std::to_string(total) +
                      ", not 1");
  }
}

}  // namespace

ProbabilityMatrix::ProbabilityMatrix(std::size_t categories) : categories_(categories) {
  if (categories < 2) {
    throw DimensionError("ProbabilityMatrix: need at least two categories");
  }
}

void ProbabilityMatrix::push_row(std::span<const double> row) {
  check_simplex_point(row, categories_, "ProbabilityMatrix");
  data_.insert(data_.end(), row.begin(), row.end());
}

double dirichlet_log_pdf(const DirichletParams& alpha, std::span<const double> p) {
  check_simplex_point(p, alpha.size(), "dirichlet_log_pdf");
  double out = ln_gamma(alpha.sum());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    out += (alpha[k] - 1.0) * std::log(p[k]) - ln_gamma(alpha[k]);
  }
  return out;
}

std::vector<double> dirichlet_mean(const DirichletParams& alpha) {
  const double total = alpha.sum();
  std::vector<double> mean(alpha.values().begin(), alpha.values().end());
  for (double& m : mean) m /= total;
  return mean;
}

DirichletParams posterior_update(const DirichletParams& alpha, std::span<const Count> counts) {
  if (counts.size() != alpha.size()) {
    throw DimensionError("posterior_update: counts and alpha differ in length");
  }
  std::vector<double> out(alpha.values().begin(), alpha.values().end());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (counts[k] < 0) throw DomainError("posterior_update: negative count");
    out[k] += static_cast<double>(counts[k]);
  }
  return DirichletParams(std::move(out));
}

DirichletSuffStat suff_stat(const ProbabilityMatrix& data) {
  if (data.rows() == 0) {
    throw EmptyDataError("suff_stat: no rows");
  }
  DirichletSuffStat stat;
  stat.rows = data.rows();
  stat.mean_log.assign(data.categories(), 0.0);
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    for (std::size_t k = 0; k < row.size(); ++k) {
      stat.mean_log[k] += std::log(row[k]);
    }
  }
  for (double& v : stat.mean_log) v /= static_cast<double>(stat.rows);
  return stat;
}

double dirichlet_objective(const DirichletSuffStat& stat, std::span<const double> alpha) {
  double total = 0.0;
  double out = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    total += alpha[k];
    out += alpha[k] * stat.mean_log[k] - ln_gamma(alpha[k]);
  }
  return out + ln_gamma(total);
}

std::vector<double> dirichlet_gradient(const DirichletSuffStat& stat,
                                       std::span<const double> alpha) {
  const double psi_total = digamma(std::accumulate(alpha.begin(), alpha.end(), 0.0));
  std::vector<double> g(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    g[k] = psi_total - digamma(alpha[k]) + stat.mean_log[k];
  }
  return g;
}

StructuredHessian dirichlet_hessian(std::span<const double> alpha) {
  StructuredHessian h;
  h.constant = trigamma(std::accumulate(alpha.begin(), alpha.end(), 0.0));
  h.diag.resize(alpha.size());
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    h.diag[k] = -trigamma(alpha[k]);
  }
  return h;
}

SolverReport fit_dirichlet(const DirichletSuffStat& stat, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  ConcaveProblem problem;
  problem.objective = [&stat](std::span<const double> a) { return dirichlet_objective(stat, a); };
  problem.gradient = [&stat](std::span<const double> a) { return dirichlet_gradient(stat, a); };
  problem.hessian = [](std::span<const double> a) { return dirichlet_hessian(a); };
  SolverReport report =
      maximize_newton(problem, config.initial_alpha(stat.mean_log.size()), config);
  report.timings.solve_seconds = seconds_since(start);
  return report;
}

SolverReport fit_dirichlet(const ProbabilityMatrix& data, const SolverConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const DirichletSuffStat stat = suff_stat(data);
  const double precompute = seconds_since(start);
  SolverReport report = fit_dirichlet(stat, config);
  report.timings.precompute_seconds = precompute;
  return report;
}

DirichletParams dirichlet_moment_init(const ProbabilityMatrix& data) {
  if (data.rows() == 0) throw EmptyDataError("dirichlet_moment_init: no rows");
  const std::size_t k_count = data.categories();
  std::vector<double> mean(k_count, 0.0);
  double second = 0.0;
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    for (std::size_t k = 0; k < k_count; ++k) mean[k] += row[k];
    second += row[0] * row[0];
  }
  const double rows = static_cast<double>(data.rows());
  for (double& m : mean) m /= rows;
  second /= rows;
  const double variance = second - mean[0] * mean[0];
  if (!(variance > 0.0)) {
    throw DegenerateDataError("dirichlet_moment_init: zero variance in category 0");
  }
  const double precision = (mean[0] - second) / variance;
  if (!(precision > 0.0)) {
    throw DegenerateDataError("dirichlet_moment_init: non-positive precision estimate");
  }
  for (double& m : mean) m *= precision;
  return DirichletParams(std::move(mean));
}

}  // namespace dmfit
