#pragma once

#include <span>
#include <vector>

#include "dmfit/compressed_stats.hpp"
#include "dmfit/newton.hpp"
#include "dmfit/params.hpp"
#include "dmfit/solver.hpp"

namespace dmfit {

// ln P(c | alpha) for one count vector, including the multinomial coefficient.
// An all-zero vector has probability 1.
double dm_log_prob(const DirichletParams& alpha, std::span<const Count> counts);

// The alpha-dependent part of the dataset log-likelihood, computed row by row:
//   sum_n sum_k LG(alpha_k, d_nk) - sum_n LG(sum alpha, sum_k d_nk)
// where LG(a, n) = ln Gamma(a + n) - ln Gamma(a).
double dm_objective_naive(const CountMatrix& data, std::span<const double> alpha);

// The same quantity from the tallies, in O(MK):
//   sum_k sum_m u_km ln(alpha_k + m) - sum_m v_m ln(sum alpha + m)
double dm_objective_compressed(const CompressedStats& stats, std::span<const double> alpha);

std::vector<double> dm_gradient_compressed(const CompressedStats& stats,
                                           std::span<const double> alpha);

// d_i = -sum_m u_im / (alpha_i + m)^2, c = sum_m v_m / (sum alpha + m)^2.
StructuredHessian dm_hessian_compressed(const CompressedStats& stats,
                                        std::span<const double> alpha);

// Row-scanning forms via digamma / trigamma differences; O(NK) per call.
std::vector<double> dm_gradient_naive(const CountMatrix& data, std::span<const double> alpha);
StructuredHessian dm_hessian_naive(const CountMatrix& data, std::span<const double> alpha);

// One multiplicative fixed-point update
//   alpha_k <- alpha_k * (sum_m u_km / (alpha_k + m)) / (sum_m v_m / (sum alpha + m)).
// Throws DegenerateDataError when the denominator vanishes (no counts at all).
std::vector<double> fp_step_compressed(const CompressedStats& stats,
                                       std::span<const double> alpha);

// The same update written with digamma differences over the raw rows.
std::vector<double> fp_step_naive(const CountMatrix& data, std::span<const double> alpha);

// Fits alpha from the tallies. Only the compressed methods are accepted here
// (std::invalid_argument otherwise). Throws EmptyDataError if no row has a
// positive total, DegenerateDataError if some category is never observed
// (its MLE is alpha_k -> 0) and DivergenceError when alpha exceeds the cap.
SolverReport fit_dm(const CompressedStats& stats, const SolverConfig& config = {});

// Fits alpha from raw rows with any method. For the compressed methods the
// tally build is timed as the precompute phase.
SolverReport fit_dm(const CountMatrix& data, const SolverConfig& config = {});

}  // namespace dmfit
