#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dmfit/compressed_stats.hpp"
#include "dmfit/params.hpp"

namespace dmfit {

// Counter-based generator built on the SplitMix64 finalizer. Draw i of stream
// (seed, stream) is
//   mix64(key + (i + 1) * 0x9E3779B97F4A7C15),  key = mix64(seed) ^ mix64(~stream)
// so every stream is reproducible on its own and independent of how streams
// are scheduled across threads. Only integer arithmetic, sqrt and log are used
// on the sampling paths.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();
  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  // Uniform integer on [low, high].
  std::int64_t uniform_int(std::int64_t low, std::int64_t high);
  // Standard normal (Marsaglia polar method).
  double normal();

  using result_type = std::uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }
  result_type operator()() { return next_u64(); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);

// Natural log of a Gamma(shape, 1) variate (Marsaglia-Tsang; shapes below 1
// use the Gamma(shape + 1) * U^(1/shape) boost carried out in log space).
double sample_log_gamma(double shape, CounterRng& rng);

// A Dirichlet(alpha) point from normalized gamma variates. Components may
// underflow to exactly 0 for very small alpha_k.
std::vector<double> sample_dirichlet(const DirichletParams& alpha, CounterRng& rng);

// A Multinomial(n, p) count vector; p need not be normalized.
std::vector<Count> sample_counts(std::span<const double> p, Count n, CounterRng& rng);

// Per-row total: fixed when low == high, otherwise uniform on [low, high].
struct RowTotalSpec {
  Count low = 0;
  Count high = 0;
  static RowTotalSpec fixed(Count m) { return {m, m}; }
  static RowTotalSpec uniform(Count low, Count high) { return {low, high}; }
};

struct SynthSpec {
  DirichletParams alpha;
  std::size_t rows = 0;
  RowTotalSpec row_total;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on rows == 0 or a bad row-total range.
  void validate() const;
};

// N independent Dirichlet-multinomial rows. Row n draws from stream n, so the
// matrix is identical for any thread count.
CountMatrix synthesize(const SynthSpec& spec, std::size_t threads = 1);

}  // namespace dmfit
