#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace dmfit {

using Count = std::int64_t;

// N rows of K non-negative integer counts, stored row-major.
class CountMatrix {
 public:
  explicit CountMatrix(std::size_t categories);

  // Throws DimensionError on a length mismatch and DomainError on a negative entry.
  void push_row(std::span<const Count> row);

  std::size_t categories() const noexcept { return categories_; }
  std::size_t rows() const noexcept { return categories_ == 0 ? 0 : data_.size() / categories_; }
  std::span<const Count> row(std::size_t n) const {
    return {data_.data() + n * categories_, categories_};
  }
  std::span<const Count> values() const noexcept { return data_; }

  friend bool operator==(const CountMatrix&, const CountMatrix&) = default;

 private:
  std::size_t categories_;
  std::vector<Count> data_;
};

// The tally matrix U and vector v of a count dataset:
//   u[k][m] = #rows whose count in column k exceeds m
//   v[m]    = #rows whose total exceeds m
// with m in [0, M) and M the largest row total seen. All-zero rows are
// counted in rows() but leave U and v untouched.
//
// Values are additive: the stats of a concatenated dataset are the
// elementwise (zero-padded) sum of the stats of its parts.
class CompressedStats {
 public:
  explicit CompressedStats(std::size_t categories);

  // Throws DimensionError if row.size() != categories().
  void add_row(std::span<const Count> row);

  // In-place version of merge(). Throws DimensionError on a K mismatch.
  CompressedStats& operator+=(const CompressedStats& other);

  std::size_t categories() const noexcept { return u_.size(); }
  std::size_t max_total() const noexcept { return v_.size(); }  // M
  std::uint64_t rows() const noexcept { return rows_; }         // N
  std::uint64_t effective_rows() const noexcept { return effective_rows_; }

  std::span<const Count> u(std::size_t k) const { return u_[k]; }
  std::span<const Count> v() const noexcept { return v_; }

  // The multiset of column-k counts over the effective rows, ascending,
  // recovered from the decrements of u[k].
  std::vector<Count> column_values(std::size_t k) const;

  // Checks every structural invariant; throws DomainError naming the first
  // violation.
  void validate() const;

  // Rebuilds a value from raw parts (deserialization). Runs validate().
  static CompressedStats from_parts(std::vector<std::vector<Count>> u, std::vector<Count> v,
                                    std::uint64_t rows, std::uint64_t effective_rows);

  friend bool operator==(const CompressedStats&, const CompressedStats&) = default;

 private:
  void widen(std::size_t new_max_total);

  std::vector<std::vector<Count>> u_;
  std::vector<Count> v_;
  std::uint64_t rows_ = 0;
  std::uint64_t effective_rows_ = 0;
};

CompressedStats build_compressed(const CountMatrix& data);

CompressedStats merge(const CompressedStats& a, const CompressedStats& b);

// build_compressed over `shards` contiguous row ranges on separate threads,
// combined with merge. The result does not depend on the shard count.
CompressedStats build_compressed_parallel(const CountMatrix& data, std::size_t shards);

// Versioned text format:
//   DMSTATS 1
//   K M N N_effective
//   K lines of M tallies (rows of U)
//   1 line of M tallies (v)
void write_stats(std::ostream& out, const CompressedStats& stats);
CompressedStats read_stats(std::istream& in);

inline constexpr const char* kStatsMagic = "DMSTATS";
inline constexpr int kStatsVersion = 1;

}  // namespace dmfit
