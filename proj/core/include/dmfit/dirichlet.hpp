#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmfit/compressed_stats.hpp"
#include "dmfit/newton.hpp"
#include "dmfit/params.hpp"
#include "dmfit/solver.hpp"

namespace dmfit {

// Rows sum to 1 within this tolerance.
inline constexpr double kSimplexTolerance = 1e-9;

// N rows of strictly positive K-simplex points (the pure Dirichlet dataset).
class ProbabilityMatrix {
 public:
  explicit ProbabilityMatrix(std::size_t categories);

  // Throws DimensionError on a length mismatch, DomainError when an entry is
  // outside (0, 1] or the row does not sum to 1.
  void push_row(std::span<const double> row);

  std::size_t categories() const noexcept { return categories_; }
  std::size_t rows() const noexcept { return data_.size() / categories_; }
  std::span<const double> row(std::size_t n) const {
    return {data_.data() + n * categories_, categories_};
  }

 private:
  std::size_t categories_;
  std::vector<double> data_;
};

// Mean log-probability per category: v_k = (1/N) sum_n ln p_{n,k}.
struct DirichletSuffStat {
  std::vector<double> mean_log;
  std::size_t rows = 0;
};

double dirichlet_log_pdf(const DirichletParams& alpha, std::span<const double> p);

std::vector<double> dirichlet_mean(const DirichletParams& alpha);

DirichletParams posterior_update(const DirichletParams& alpha, std::span<const Count> counts);

// Throws EmptyDataError on an empty matrix.
DirichletSuffStat suff_stat(const ProbabilityMatrix& data);

// F(alpha) = ln Gamma(sum alpha) - sum ln Gamma(alpha_k) + sum alpha_k v_k, and
// its derivatives. The Hessian is diag(-trigamma(alpha_k)) + trigamma(sum alpha).
double dirichlet_objective(const DirichletSuffStat& stat, std::span<const double> alpha);
std::vector<double> dirichlet_gradient(const DirichletSuffStat& stat,
                                       std::span<const double> alpha);
StructuredHessian dirichlet_hessian(std::span<const double> alpha);

// Newton ascent on F. config.method is ignored. Throws DivergenceError when
// the MLE is unbounded (e.g. every row identical).
SolverReport fit_dirichlet(const DirichletSuffStat& stat, const SolverConfig& config = {});

// As above, timing suff_stat() as the precompute phase.
SolverReport fit_dirichlet(const ProbabilityMatrix& data, const SolverConfig& config = {});

// Method-of-moments starting point alpha = s * mean with the precision s
// matched on the first category's variance. Throws DegenerateDataError when
// that variance is zero.
DirichletParams dirichlet_moment_init(const ProbabilityMatrix& data);

}  // namespace dmfit
