#include "dmfit/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "dmfit/errors.hpp"

namespace dmfit {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed) ^ mix64(~stream)) {}

std::uint64_t CounterRng::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::int64_t CounterRng::uniform_int(std::int64_t low, std::int64_t high) {
  if (low > high) throw std::invalid_argument("uniform_int: low > high");
  const std::uint64_t span = static_cast<std::uint64_t>(high) - static_cast<std::uint64_t>(low);
  if (span == std::numeric_limits<std::uint64_t>::max()) {
    return static_cast<std::int64_t>(next_u64());
  }
  const std::uint64_t range = span + 1;
  // Reject the top partial bucket so every value is equally likely.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return static_cast<std::int64_t>(static_cast<std::uint64_t>(low) + x % range);
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double x = 0.0;
  double y = 0.0;
  double s = 0.0;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double scale = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = y * scale;
  has_spare_ = true;
  return x * scale;
}

double sample_log_gamma(double shape, CounterRng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    throw DomainError("sample_log_gamma: shape must be finite and > 0");
  }
  if (shape < 1.0) {
    return sample_log_gamma(shape + 1.0, rng) + std::log(rng.uniform()) / shape;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  while (true) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return std::log(d * v);
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return std::log(d * v);
  }
}

std::vector<double> sample_dirichlet(const DirichletParams& alpha, CounterRng& rng) {
  std::vector<double> logs(alpha.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    logs[k] = sample_log_gamma(alpha[k], rng);
    top = std::max(top, logs[k]);
  }
  double total = 0.0;
  for (double& x : logs) {
    x = std::exp(x - top);
    total += x;
  }
  for (double& x : logs) x /= total;
  return logs;
}

std::vector<Count> sample_counts(std::span<const double> p, Count n, CounterRng& rng) {
  if (n < 0) throw DomainError("sample_counts: n must be >= 0");
  std::vector<double> cumulative(p.size());
  double running = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (!(p[k] >= 0.0)) throw DomainError("sample_counts: negative probability");
    running += p[k];
    cumulative[k] = running;
  }
  if (!(running > 0.0)) throw DomainError("sample_counts: probabilities sum to zero");
  std::vector<Count> counts(p.size(), 0);
  for (Count i = 0; i < n; ++i) {
    const double target = rng.uniform() * running;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    if (it == cumulative.end()) --it;
    // Skip zero-probability categories that share a cumulative value.
    while (it != cumulative.begin() && *(it - 1) == *it) --it;
    ++counts[static_cast<std::size_t>(it - cumulative.begin())];
  }
  return counts;
}

void SynthSpec::validate() const {
  if (rows == 0) throw std::invalid_argument("SynthSpec: rows must be >= 1");
  if (row_total.low < 0 || row_total.high < row_total.low) {
    throw std::invalid_argument("SynthSpec: row totals need 0 <= low <= high");
  }
}

CountMatrix synthesize(const SynthSpec& spec, std::size_t threads) {
  spec.validate();
  const std::size_t k_count = spec.alpha.size();
  std::vector<Count> cells(spec.rows * k_count);
  const auto fill = [&](std::size_t begin, std::size_t end) {
    for (std::size_t n = begin; n < end; ++n) {
      CounterRng rng(spec.seed, n);
      const Count total = spec.row_total.low == spec.row_total.high
                              ? spec.row_total.low
                              : rng.uniform_int(spec.row_total.low, spec.row_total.high);
      const std::vector<double> p = sample_dirichlet(spec.alpha, rng);
      const std::vector<Count> counts = sample_counts(p, total, rng);
      std::copy(counts.begin(), counts.end(), cells.begin() + static_cast<std::ptrdiff_t>(n * k_count));
    }
  };
  threads = std::clamp<std::size_t>(threads, 1, spec.rows);
  if (threads == 1) {
    fill(0, spec.rows);
  } else {
    std::vector<std::jthread> workers;
    for (std::size_t t = 0; t < threads; ++t) {
      workers.emplace_back(fill, spec.rows * t / threads, spec.rows * (t + 1) / threads);
    }
  }
  CountMatrix out(k_count);
  for (std::size_t n = 0; n < spec.rows; ++n) {
    out.push_row(std::span<const Count>(cells.data() + n * k_count, k_count));
  }
  return out;
}

}  // namespace dmfit
