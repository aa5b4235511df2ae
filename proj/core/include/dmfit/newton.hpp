#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dmfit/params.hpp"
#include "dmfit/solver.hpp"

namespace dmfit {

// H = diag(d) + c * 1 1^T.
struct StructuredHessian {
  std::vector<double> diag;
  double constant = 0.0;
};

struct NewtonStep {
  std::vector<double> delta;  // H^{-1} g
};

// Solves H delta = g in O(K) with the Sherman-Morrison identity.
// Throws SingularHessianError if some d_k is zero, 1 + c sum(1/d) vanishes, or
// the result is not finite. Throws DimensionError if g and d differ in length.
NewtonStep solve_structured(const StructuredHessian& h, std::span<const double> g);

using Objective = std::function<double(std::span<const double>)>;

// Objective values closer than this (relative, floor 1) count as equal when
// checking for ascent; it absorbs rounding noise in the objective itself.
inline constexpr double kAscentSlack = 1e-12;

bool no_worse(double candidate, double current);

struct DampedStep {
  std::vector<double> alpha;
  double step = 0.0;       // the accepted t, 0 on stall
  double objective = 0.0;  // objective at `alpha`
  bool stalled = false;
};

// Tries alpha - t delta for t = 1, 1/2, ..., 2^-30 and returns the first
// candidate that is strictly positive and does not lower the objective. On a
// stall the input alpha is returned unchanged.
DampedStep damped_update(std::span<const double> alpha, std::span<const double> delta,
                         const Objective& objective);
DampedStep damped_update(std::span<const double> alpha, std::span<const double> delta,
                         const Objective& objective, double current_objective);

inline constexpr int kMaxHalvings = 30;

// The callbacks a maximization driver needs. `fallback` is an optional
// always-ascending step (a fixed-point update) tried when Newton stalls.
struct ConcaveProblem {
  Objective objective;
  std::function<std::vector<double>(std::span<const double>)> gradient;
  std::function<StructuredHessian(std::span<const double>)> hessian;
  std::function<std::vector<double>(std::span<const double>)> fallback;
};

// Both loops give up (converged = false) after this many consecutive updates
// that move every alpha_k by at most kStagnationStep relative and do not lower
// the best ||g||_inf seen so far. The tolerance is then below what the
// floating-point grid of alpha allows (e.g. a two-point cycle next to the
// optimum on very large data).
inline constexpr int kStagnationWindow = 10;
inline constexpr double kStagnationStep = 1e-12;

// Damped Newton ascent from `init` until ||g||_inf <= tol or max_iters.
// Throws DivergenceError / DegenerateDataError when alpha leaves
// [alpha_floor, alpha_cap]. Timings are left zero for the caller to fill.
SolverReport maximize_newton(const ConcaveProblem& problem, std::vector<double> init,
                             const SolverConfig& config);

// Repeats alpha <- problem.fallback(alpha) under the same stopping rule.
SolverReport iterate_fixed_point(const ConcaveProblem& problem, std::vector<double> init,
                                 const SolverConfig& config);

double inf_norm(std::span<const double> v);

}  // namespace dmfit
