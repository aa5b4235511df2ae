#include "dmfit/newton.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dmfit/errors.hpp"

namespace dmfit {

double inf_norm(std::span<const double> v) {
  double out = 0.0;
  for (double x : v) out = std::max(out, std::fabs(x));
  return out;
}

NewtonStep solve_structured(const StructuredHessian& h, std::span<const double> g) {
  const std::size_t k = h.diag.size();
  if (g.size() != k) {
    throw DimensionError("solve_structured: gradient has " + std::to_string(g.size()) +
                         " entries, Hessian diagonal has " + std::to_string(k));
  }
  // H^{-1} g = g/d - (1/d) * c sum(g/d) / (1 + c sum(1/d)); the c = 0 case is
  // the plain diagonal solve.
  double sum_inv = 0.0;
  double sum_g_over_d = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = h.diag[i];
    if (d == 0.0 || !std::isfinite(d)) {
      throw SingularHessianError("solve_structured: zero or non-finite diagonal entry at " +
                                 std::to_string(i));
    }
    sum_inv += 1.0 / d;
    sum_g_over_d += g[i] / d;
  }
  const double c_sum_inv = h.constant * sum_inv;
  const double denom = 1.0 + c_sum_inv;
  if (!std::isfinite(denom) || std::fabs(denom) <= 1e-14 * (1.0 + std::fabs(c_sum_inv))) {
    throw SingularHessianError("solve_structured: 1/c + sum(1/d) vanishes");
  }
  const double shift = h.constant * sum_g_over_d / denom;

  NewtonStep step;
  step.delta.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    step.delta[i] = (g[i] - shift) / h.diag[i];
    if (!std::isfinite(step.delta[i])) {
      throw SingularHessianError("solve_structured: non-finite step");
    }
  }
  return step;
}

bool no_worse(double candidate, double current) {
  if (!std::isfinite(candidate)) return false;
  return candidate >= current - kAscentSlack * std::max(1.0, std::fabs(current));
}

DampedStep damped_update(std::span<const double> alpha, std::span<const double> delta,
                         const Objective& objective) {
  return damped_update(alpha, delta, objective, objective(alpha));
}

DampedStep damped_update(std::span<const double> alpha, std::span<const double> delta,
                         const Objective& objective, double current_objective) {
  if (alpha.size() != delta.size()) {
    throw DimensionError("damped_update: alpha and delta differ in length");
  }
  std::vector<double> candidate(alpha.size());
  double t = 1.0;
  for (int halving = 0; halving <= kMaxHalvings; ++halving, t *= 0.5) {
    bool positive = true;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      candidate[k] = alpha[k] - t * delta[k];
      if (!(candidate[k] > 0.0)) {
        positive = false;
        break;
      }
    }
    if (!positive) continue;
    const double value = objective(candidate);
    if (no_worse(value, current_objective)) {
      return {std::move(candidate), t, value, false};
    }
  }
  return {std::vector<double>(alpha.begin(), alpha.end()), 0.0, current_objective, true};
}

namespace {

void check_bounds(std::span<const double> alpha, const SolverConfig& config, int iteration) {
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (!std::isfinite(alpha[k]) || alpha[k] > config.alpha_cap) {
      throw DivergenceError("alpha[" + std::to_string(k) + "] exceeded alpha_cap " +
                            std::to_string(config.alpha_cap) + " at iteration " +
                            std::to_string(iteration) + "; the MLE is unbounded");
    }
    if (alpha[k] < config.alpha_floor) {
      throw DegenerateDataError("alpha[" + std::to_string(k) + "] fell below alpha_floor at " +
                                "iteration " + std::to_string(iteration) +
                                "; the MLE lies on the boundary");
    }
  }
}

SolverReport make_report(std::vector<double> alpha, int iterations, double grad_norm,
                         bool converged, double objective, const SolverConfig& config) {
  return SolverReport{DirichletParams(std::move(alpha)), iterations, grad_norm, converged,
                      objective,                         PhaseTimings{}, config.method};
}

}  // namespace

namespace {

bool tiny_update(std::span<const double> before, std::span<const double> after) {
  for (std::size_t k = 0; k < before.size(); ++k) {
    if (std::fabs(after[k] - before[k]) > kStagnationStep * std::fabs(before[k])) return false;
  }
  return true;
}

// Counts consecutive tiny updates that fail to improve the best gradient norm.
class StagnationMonitor {
 public:
  explicit StagnationMonitor(double initial_norm) : best_(initial_norm) {}

  void record(std::span<const double> before, std::span<const double> after, double norm) {
    const bool improved = norm < best_;
    best_ = std::min(best_, norm);
    count_ = !improved && tiny_update(before, after) ? count_ + 1 : 0;
  }
  bool stalled() const { return count_ >= kStagnationWindow; }

 private:
  double best_;
  int count_ = 0;
};

}  // namespace

SolverReport maximize_newton(const ConcaveProblem& problem, std::vector<double> alpha,
                             const SolverConfig& config) {
  config.validate();
  check_bounds(alpha, config, 0);
  double value = problem.objective(alpha);
  std::vector<double> grad = problem.gradient(alpha);
  int iterations = 0;
  StagnationMonitor monitor(inf_norm(grad));
  bool converged = false;
  while (true) {
    if (inf_norm(grad) <= config.tol) {
      converged = true;
      break;
    }
    if (iterations >= config.max_iters || monitor.stalled()) break;

    const std::vector<double> previous = alpha;
    DampedStep step;
    step.stalled = true;
    try {
      const NewtonStep newton = solve_structured(problem.hessian(alpha), grad);
      step = damped_update(alpha, newton.delta, problem.objective, value);
    } catch (const SingularHessianError&) {
      // fall through to the fallback step
    }
    if (step.stalled) {
      if (!problem.fallback) break;
      std::vector<double> next = problem.fallback(alpha);
      if (next == alpha) break;
      alpha = std::move(next);
      value = problem.objective(alpha);
    } else {
      alpha = std::move(step.alpha);
      value = step.objective;
    }
    ++iterations;
    check_bounds(alpha, config, iterations);
    grad = problem.gradient(alpha);
    monitor.record(previous, alpha, inf_norm(grad));
  }
  return make_report(std::move(alpha), iterations, inf_norm(grad), converged, value, config);
}

SolverReport iterate_fixed_point(const ConcaveProblem& problem, std::vector<double> alpha,
                                 const SolverConfig& config) {
  config.validate();
  check_bounds(alpha, config, 0);
  std::vector<double> grad = problem.gradient(alpha);
  int iterations = 0;
  StagnationMonitor monitor(inf_norm(grad));
  bool converged = false;
  while (true) {
    if (inf_norm(grad) <= config.tol) {
      converged = true;
      break;
    }
    if (iterations >= config.max_iters || monitor.stalled()) break;
    std::vector<double> next = problem.fallback(alpha);
    if (next == alpha) break;
    std::swap(alpha, next);
    ++iterations;
    check_bounds(alpha, config, iterations);
    grad = problem.gradient(alpha);
    monitor.record(next, alpha, inf_norm(grad));
  }
  const double value = problem.objective(alpha);
  return make_report(std::move(alpha), iterations, inf_norm(grad), converged, value, config);
}

}  // namespace dmfit
