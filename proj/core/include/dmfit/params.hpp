#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dmfit {

// A Dirichlet parameter vector: K >= 2 finite, strictly positive reals.
class DirichletParams {
 public:
  // Throws DimensionError for K < 2 and DomainError for a non-positive entry.
  explicit DirichletParams(std::vector<double> alpha);

  static DirichletParams ones(std::size_t categories);

  std::size_t size() const noexcept { return alpha_.size(); }
  double operator[](std::size_t k) const { return alpha_[k]; }
  std::span<const double> values() const noexcept { return alpha_; }
  double sum() const noexcept;

  friend bool operator==(const DirichletParams&, const DirichletParams&) = default;

 private:
  std::vector<double> alpha_;
};

}  // namespace dmfit
