#include "dmfit/special_functions.hpp"

#include <array>
#include <cmath>
#include <string>

#include "dmfit/errors.hpp"

namespace dmfit {

namespace {

constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kHalfLogTwoPi = 0.91893853320467274178;

// Below this the recurrence Gamma(x+1) = x Gamma(x) is used to shift the
// argument up before the asymptotic series is applied.
constexpr double kAsymptoticFloor = 10.0;

// Taylor expansion of ln Gamma(1 + z) is used for |z| below this; it keeps full
// relative accuracy next to the zeros at x = 1 and x = 2.
constexpr double kTaylorRadius = 0.25;

// zeta(k) for k = 2..31.
constexpr std::array<double, 30> kZeta = {
    1.6449340668482264365, 1.2020569031595942854, 1.0823232337111381915,
    1.0369277551433699263, 1.0173430619844491397, 1.0083492773819228268,
    1.0040773561979443394, 1.0020083928260822144, 1.0009945751278180853,
    1.0004941886041194646, 1.0002460865533080483, 1.0001227133475784891,
    1.0000612481350587048, 1.0000305882363070205, 1.0000152822594086519,
    1.0000076371976378998, 1.0000038172932649998, 1.0000019082127165539,
    1.0000009539620338728, 1.0000004769329867878, 1.0000002384505027277,
    1.0000001192199259653, 1.0000000596081890513, 1.0000000298035035147,
    1.0000000149015548284, 1.0000000074507117898, 1.0000000037253340248,
    1.0000000018626597235, 1.0000000009313274324, 1.0000000004656629065,
};

void require_positive(double x, const char* fn) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be finite and > 0, got " +
                      std::to_string(x));
  }
}

// ln Gamma(1 + z) for |z| <= kTaylorRadius.
double ln_gamma_1p_taylor(double z) {
  double term = -z;  // (-z)^k
  double sum = -kEulerGamma * z;
  for (std::size_t i = 0; i < kZeta.size(); ++i) {
    term *= -z;
    const double k = static_cast<double>(i + 2);
    sum += kZeta[i] * term / k;
  }
  return sum;
}

// Stirling series, x >= kAsymptoticFloor.
double ln_gamma_asymptotic(double x) {
  const double z = 1.0 / x;
  const double z2 = z * z;
  const double series =
      z * (1.0 / 12.0 +
           z2 * (-1.0 / 360.0 +
                 z2 * (1.0 / 1260.0 +
                       z2 * (-1.0 / 1680.0 +
                             z2 * (1.0 / 1188.0 +
                                   z2 * (-691.0 / 360360.0 +
                                         z2 * (1.0 / 156.0 + z2 * (-3617.0 / 122400.0))))))));
  return (x - 0.5) * std::log(x) - x + kHalfLogTwoPi + series;
}

}  // namespace

double ln_gamma(double x) {
  require_positive(x, "ln_gamma");
  if (std::fabs(x - 1.0) <= kTaylorRadius) {
    return ln_gamma_1p_taylor(x - 1.0);
  }
  if (std::fabs(x - 2.0) <= kTaylorRadius) {
    return ln_gamma_1p_taylor(x - 2.0) + std::log1p(x - 2.0);
  }
  if (x >= kAsymptoticFloor) {
    return ln_gamma_asymptotic(x);
  }
  // ln Gamma(x) = ln Gamma(x + n) - ln(x (x+1) ... (x+n-1)). The product stays
  // far from overflow because x + n < kAsymptoticFloor + 1.
  double product = 1.0;
  while (x < kAsymptoticFloor) {
    product *= x;
    x += 1.0;
  }
  return ln_gamma_asymptotic(x) - std::log(product);
}

double digamma(double x) {
  require_positive(x, "digamma");
  double shift = 0.0;
  while (x < kAsymptoticFloor) {
    shift += 1.0 / x;
    x += 1.0;
  }
  const double z2 = 1.0 / (x * x);
  const double series =
      z2 * (1.0 / 12.0 -
            z2 * (1.0 / 120.0 -
                  z2 * (1.0 / 252.0 -
                        z2 * (1.0 / 240.0 -
                              z2 * (1.0 / 132.0 - z2 * (691.0 / 32760.0 - z2 * (1.0 / 12.0)))))));
  return std::log(x) - 0.5 / x - series - shift;
}

double trigamma(double x) {
  require_positive(x, "trigamma");
  double shift = 0.0;
  while (x < kAsymptoticFloor) {
    shift += 1.0 / (x * x);
    x += 1.0;
  }
  const double z = 1.0 / x;
  const double z2 = z * z;
  const double series =
      z * z2 *
      (1.0 / 6.0 -
       z2 * (1.0 / 30.0 -
             z2 * (1.0 / 42.0 -
                   z2 * (1.0 / 30.0 -
                         z2 * (5.0 / 66.0 - z2 * (691.0 / 2730.0 - z2 * (7.0 / 6.0)))))));
  return z + 0.5 * z2 + series + shift;
}

double dual_log_gamma(double a, std::int64_t n) {
  require_positive(a, "dual_log_gamma");
  if (n < 0) {
    throw DomainError("dual_log_gamma: n must be >= 0, got " + std::to_string(n));
  }
  if (n > kDualLogGammaSumThreshold) {
    return ln_gamma(a + static_cast<double>(n)) - ln_gamma(a);
  }
  double sum = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    sum += std::log(a + static_cast<double>(i));
  }
  return sum;
}

}  // namespace dmfit
