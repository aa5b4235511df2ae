#include <array>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "dmfit/errors.hpp"
#include "dmfit/params.hpp"
#include "dmfit/solver.hpp"

namespace dmfit {

DirichletParams::DirichletParams(std::vector<double> alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 2) {
    throw DimensionError("DirichletParams: need K >= 2, got K = " + std::to_string(alpha_.size()));
  }
  for (std::size_t k = 0; k < alpha_.size(); ++k) {
    if (!(alpha_[k] > 0.0) || !std::isfinite(alpha_[k])) {
      throw DomainError("DirichletParams: alpha[" + std::to_string(k) +
                        "] must be finite and > 0, got " + std::to_string(alpha_[k]));
    }
  }
}

DirichletParams DirichletParams::ones(std::size_t categories) {
  return DirichletParams(std::vector<double>(categories, 1.0));
}

double DirichletParams::sum() const noexcept {
  return std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 4> kMethodNames = {{
    {Method::kNewtonCompressed, "newton-compressed"},
    {Method::kFixedPointCompressed, "fp-compressed"},
    {Method::kFixedPointNaive, "fp-naive"},
    {Method::kNewtonNaive, "newton-naive"},
}};

}  // namespace

std::string_view method_name(Method method) {
  for (const auto& [m, name] : kMethodNames) {
    if (m == method) return name;
  }
  return "unknown";
}

std::optional<Method> parse_method(std::string_view name) {
  for (const auto& [m, n] : kMethodNames) {
    if (n == name) return m;
  }
  return std::nullopt;
}

void SolverConfig::validate() const {
  if (!(tol > 0.0)) throw std::invalid_argument("SolverConfig: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("SolverConfig: max_iters must be >= 1");
  if (!(alpha_floor >= 0.0) || !(alpha_cap > alpha_floor)) {
    throw std::invalid_argument("SolverConfig: need 0 <= alpha_floor < alpha_cap");
  }
}

std::vector<double> SolverConfig::initial_alpha(std::size_t categories) const {
  if (!init) return std::vector<double>(categories, 1.0);
  if (init->size() != categories) {
    throw DimensionError("SolverConfig: init has " + std::to_string(init->size()) +
                         " entries, data has " + std::to_string(categories) + " categories");
  }
  const DirichletParams checked(*init);
  return {checked.values().begin(), checked.values().end()};
}

}  // namespace dmfit
