#pragma once

// Random generators and brute-force oracles shared by the test binaries. The
// oracles evaluate the textbook definitions directly and never call into the
// code paths they check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dmfit/compressed_stats.hpp"

namespace dmfit::testing {

using Rows = std::vector<std::vector<Count>>;

inline CountMatrix to_matrix(const Rows& rows, std::size_t categories) {
  CountMatrix out(categories);
  for (const auto& r : rows) out.push_row(r);
  return out;
}

// Rows with K columns and totals in [0, max_total], with a share of all-zero rows.
inline Rows random_rows(std::mt19937_64& gen, std::size_t n, std::size_t k, Count max_total,
                        double zero_row_share = 0.05) {
  std::uniform_int_distribution<Count> total_dist(1, std::max<Count>(max_total, 1));
  std::uniform_int_distribution<std::size_t> col_dist(0, k - 1);
  std::bernoulli_distribution zero_row(zero_row_share);
  Rows rows(n, std::vector<Count>(k, 0));
  for (auto& row : rows) {
    if (max_total == 0 || zero_row(gen)) continue;
    const Count total = total_dist(gen);
    // Skewed column choice so counts are uneven across categories.
    std::geometric_distribution<std::size_t> skew(0.3);
    for (Count i = 0; i < total; ++i) {
      const std::size_t c = gen() % 2 == 0 ? col_dist(gen) : std::min(skew(gen), k - 1);
      ++row[c];
    }
  }
  return rows;
}

// u[k][m] = sum_n [d_nk > m], v[m] = sum_n [sum_k d_nk > m], per the
// indicator definitions.
struct BruteStats {
  std::vector<std::vector<Count>> u;
  std::vector<Count> v;
  std::size_t max_total = 0;
};

inline BruteStats brute_force_stats(const Rows& rows, std::size_t k) {
  BruteStats out;
  for (const auto& r : rows) {
    Count t = 0;
    for (Count c : r) t += c;
    out.max_total = std::max<std::size_t>(out.max_total, static_cast<std::size_t>(t));
  }
  out.u.assign(k, std::vector<Count>(out.max_total, 0));
  out.v.assign(out.max_total, 0);
  for (std::size_t m = 0; m < out.max_total; ++m) {
    for (const auto& r : rows) {
      Count t = 0;
      for (std::size_t j = 0; j < k; ++j) {
        t += r[j];
        if (r[j] > static_cast<Count>(m)) ++out.u[j][m];
      }
      if (t > static_cast<Count>(m)) ++out.v[m];
    }
  }
  return out;
}

// Objective straight from the triple-sum form: every ln(alpha_k + i) term of
// every row, one by one.
inline double brute_force_objective(const Rows& rows, const std::vector<double>& alpha) {
  double total_alpha = 0.0;
  for (double a : alpha) total_alpha += a;
  long double out = 0.0L;
  for (const auto& r : rows) {
    Count t = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
      for (Count i = 0; i < r[k]; ++i) out += std::log(static_cast<long double>(alpha[k]) + i);
      t += r[k];
    }
    for (Count i = 0; i < t; ++i) out -= std::log(static_cast<long double>(total_alpha) + i);
  }
  return static_cast<double>(out);
}

inline std::vector<double> random_alpha(std::mt19937_64& gen, std::size_t k, double lo = 0.05,
                                        double hi = 20.0) {
  std::uniform_real_distribution<double> log_dist(std::log(lo), std::log(hi));
  std::vector<double> alpha(k);
  for (double& a : alpha) a = std::exp(log_dist(gen));
  return alpha;
}

// Gaussian elimination with partial pivoting, carried out in long double.
inline std::vector<double> dense_solve(const std::vector<std::vector<double>>& matrix,
                                       const std::vector<double>& rhs) {
  const std::size_t n = rhs.size();
  std::vector<std::vector<long double>> a(n, std::vector<long double>(n));
  std::vector<long double> b(rhs.begin(), rhs.end());
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) a[r][c] = matrix[r][c];
  }
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const long double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<long double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    long double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return {x.begin(), x.end()};
}

inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0;
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::fabs(b[i]));
    diff = std::max(diff, std::fabs(a[i] - b[i]));
  }
  return scale == 0.0 ? diff : diff / scale;
}

}  // namespace dmfit::testing
