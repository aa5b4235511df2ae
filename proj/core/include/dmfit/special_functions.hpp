#pragma once

#include <cstdint>

namespace dmfit {

// Scalar special functions over the positive reals. All are pure and
// reentrant; every argument must be finite and strictly positive or a
// DomainError is thrown.

// ln Gamma(x).
double ln_gamma(double x);

// Psi(x) = d/dx ln Gamma(x).
double digamma(double x);

// Psi'(x) = d/dx Psi(x). Always positive.
double trigamma(double x);

// Above this many terms dual_log_gamma switches from direct summation to a
// difference of ln_gamma values.
inline constexpr std::int64_t kDualLogGammaSumThreshold = 32;

// ln(Gamma(a + n) / Gamma(a)) = sum_{i=0}^{n-1} ln(a + i). n == 0 gives 0.
double dual_log_gamma(double a, std::int64_t n);

}  // namespace dmfit
