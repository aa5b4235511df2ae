#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dmfit/params.hpp"

namespace dmfit {

enum class Method {
  kNewtonCompressed,
  kFixedPointCompressed,
  kFixedPointNaive,
  kNewtonNaive,
};

// "newton-compressed", "fp-compressed", "fp-naive", "newton-naive".
std::string_view method_name(Method method);
std::optional<Method> parse_method(std::string_view name);
inline bool is_compressed(Method m) {
  return m == Method::kNewtonCompressed || m == Method::kFixedPointCompressed;
}

struct SolverConfig {
  double tol = 1e-10;        // on the infinity norm of the gradient
  int max_iters = 1000;
  std::optional<std::vector<double>> init;  // all ones when empty
  double alpha_cap = 1e7;    // any component above this -> DivergenceError
  double alpha_floor = 1e-12;  // any component below this -> DegenerateDataError
  Method method = Method::kNewtonCompressed;

  // Throws std::invalid_argument on tol <= 0, max_iters < 1 or bad bounds.
  void validate() const;
  std::vector<double> initial_alpha(std::size_t categories) const;
};

struct PhaseTimings {
  double precompute_seconds = 0.0;
  double solve_seconds = 0.0;
  double total_seconds() const { return precompute_seconds + solve_seconds; }
};

struct SolverReport {
  DirichletParams alpha_hat;
  int iterations = 0;
  double final_grad_norm = 0.0;
  bool converged = false;
  double objective = 0.0;
  PhaseTimings timings;
  Method method = Method::kNewtonCompressed;
};

}  // namespace dmfit
