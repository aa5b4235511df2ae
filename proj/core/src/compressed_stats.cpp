#include "dmfit/compressed_stats.hpp"

#include <algorithm>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "dmfit/errors.hpp"

namespace dmfit {

namespace {

Count checked_add(Count a, Count b) {
  Count out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("count tally exceeds the 64-bit range");
  }
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw OverflowError("row counter exceeds the 64-bit range");
  }
  return out;
}

}  // namespace

CountMatrix::CountMatrix(std::size_t categories) : categories_(categories) {
  if (categories == 0) {
    throw DimensionError("CountMatrix: need at least one category");
  }
}

void CountMatrix::push_row(std::span<const Count> row) {
  if (row.size() != categories_) {
    throw DimensionError("CountMatrix: row has " + std::to_string(row.size()) +
                         " entries, expected " + std::to_string(categories_));
  }
  for (Count c : row) {
    if (c < 0) {
      throw DomainError("CountMatrix: negative count " + std::to_string(c));
    }
  }
  data_.insert(data_.end(), row.begin(), row.end());
}

CompressedStats::CompressedStats(std::size_t categories) : u_(categories) {
  if (categories == 0) {
    throw DimensionError("CompressedStats: need at least one category");
  }
}

void CompressedStats::widen(std::size_t new_max_total) {
  if (new_max_total <= v_.size()) {
    return;
  }
  for (auto& row : u_) {
    row.resize(new_max_total, 0);
  }
  v_.resize(new_max_total, 0);
}

void CompressedStats::add_row(std::span<const Count> row) {
  if (row.size() != categories()) {
    throw DimensionError("CompressedStats::add_row: row has " + std::to_string(row.size()) +
                         " entries, expected " + std::to_string(categories()));
  }
  Count total = 0;
  for (Count c : row) {
    if (c < 0) {
      throw DomainError("CompressedStats::add_row: negative count " + std::to_string(c));
    }
    total = checked_add(total, c);
  }
  const std::uint64_t rows = checked_add(rows_, std::uint64_t{1});
  if (total == 0) {
    rows_ = rows;
    return;
  }
  if (effective_rows_ >= static_cast<std::uint64_t>(std::numeric_limits<Count>::max())) {
    throw OverflowError("CompressedStats::add_row: tally exceeds the 64-bit range");
  }
  widen(static_cast<std::size_t>(total));
  for (std::size_t k = 0; k < row.size(); ++k) {
    Count* tally = u_[k].data();
    for (Count m = 0; m < row[k]; ++m) {
      ++tally[m];
    }
  }
  Count* tally = v_.data();
  for (Count m = 0; m < total; ++m) {
    ++tally[m];
  }
  rows_ = rows;
  ++effective_rows_;
}

CompressedStats& CompressedStats::operator+=(const CompressedStats& other) {
  if (other.categories() != categories()) {
    throw DimensionError("merge: category counts differ (" + std::to_string(categories()) +
                         " vs " + std::to_string(other.categories()) + ")");
  }
  const std::uint64_t rows = checked_add(rows_, other.rows_);
  const std::uint64_t effective = checked_add(effective_rows_, other.effective_rows_);
  widen(other.max_total());
  for (std::size_t k = 0; k < u_.size(); ++k) {
    for (std::size_t m = 0; m < other.max_total(); ++m) {
      u_[k][m] = checked_add(u_[k][m], other.u_[k][m]);
    }
  }
  for (std::size_t m = 0; m < other.max_total(); ++m) {
    v_[m] = checked_add(v_[m], other.v_[m]);
  }
  rows_ = rows;
  effective_rows_ = effective;
  return *this;
}

std::vector<Count> CompressedStats::column_values(std::size_t k) const {
  std::vector<Count> out;
  out.reserve(static_cast<std::size_t>(effective_rows_));
  const auto& tally = u_.at(k);
  Count above = static_cast<Count>(effective_rows_);  // rows with count > m - 1
  for (std::size_t m = 0; m <= tally.size(); ++m) {
    const Count next = m < tally.size() ? tally[m] : 0;
    out.insert(out.end(), static_cast<std::size_t>(above - next), static_cast<Count>(m));
    above = next;
  }
  return out;
}

void CompressedStats::validate() const {
  const auto fail = [](const std::string& what) {
    throw DomainError("CompressedStats invariant violated: " + what);
  };
  const std::size_t big_m = v_.size();
  if (effective_rows_ > rows_) fail("N_effective exceeds N");
  if ((big_m == 0) != (effective_rows_ == 0)) fail("M == 0 must coincide with N_effective == 0");
  if (big_m > 0) {
    if (v_[0] != static_cast<Count>(effective_rows_)) fail("v[0] != N_effective");
    if (v_[big_m - 1] <= 0) fail("v[M-1] must be positive");
  }
  for (std::size_t m = 0; m < big_m; ++m) {
    if (v_[m] < 0) fail("negative tally in v");
    if (m + 1 < big_m && v_[m] < v_[m + 1]) fail("v is not non-increasing");
  }
  Count u_mass = 0;
  Count v_mass = 0;
  for (const auto& row : u_) {
    if (row.size() != big_m) fail("U row length differs from M");
    for (std::size_t m = 0; m < big_m; ++m) {
      if (row[m] < 0) fail("negative tally in U");
      if (row[m] > v_[m]) fail("u[k][m] exceeds v[m]");
      if (m + 1 < big_m && row[m] < row[m + 1]) fail("U row is not non-increasing");
      u_mass = checked_add(u_mass, row[m]);
    }
  }
  for (Count t : v_) v_mass = checked_add(v_mass, t);
  if (u_mass != v_mass) fail("total mass in U differs from total mass in v");
}

CompressedStats CompressedStats::from_parts(std::vector<std::vector<Count>> u,
                                            std::vector<Count> v, std::uint64_t rows,
                                            std::uint64_t effective_rows) {
  CompressedStats out(u.size());
  out.u_ = std::move(u);
  out.v_ = std::move(v);
  out.rows_ = rows;
  out.effective_rows_ = effective_rows;
  out.validate();
  return out;
}

CompressedStats build_compressed(const CountMatrix& data) {
  CompressedStats stats(data.categories());
  for (std::size_t n = 0; n < data.rows(); ++n) {
    stats.add_row(data.row(n));
  }
  return stats;
}

CompressedStats merge(const CompressedStats& a, const CompressedStats& b) {
  CompressedStats out = a;
  out += b;
  return out;
}

CompressedStats build_compressed_parallel(const CountMatrix& data, std::size_t shards) {
  const std::size_t rows = data.rows();
  shards = std::clamp<std::size_t>(shards, 1, std::max<std::size_t>(rows, 1));
  if (shards == 1) {
    return build_compressed(data);
  }
  std::vector<CompressedStats> parts(shards, CompressedStats(data.categories()));
  std::vector<std::exception_ptr> errors(shards);
  {
    std::vector<std::jthread> workers;
    workers.reserve(shards);
    for (std::size_t s = 0; s < shards; ++s) {
      workers.emplace_back([&, s] {
        try {
          const std::size_t begin = rows * s / shards;
          const std::size_t end = rows * (s + 1) / shards;
          for (std::size_t n = begin; n < end; ++n) {
            parts[s].add_row(data.row(n));
          }
        } catch (...) {
          errors[s] = std::current_exception();
        }
      });
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  for (std::size_t s = 1; s < shards; ++s) {
    parts[0] += parts[s];
  }
  return std::move(parts[0]);
}

void write_stats(std::ostream& out, const CompressedStats& stats) {
  out << kStatsMagic << ' ' << kStatsVersion << '\n';
  out << stats.categories() << ' ' << stats.max_total() << ' ' << stats.rows() << ' '
      << stats.effective_rows() << '\n';
  const auto write_line = [&out](std::span<const Count> values) {
    for (std::size_t m = 0; m < values.size(); ++m) {
      if (m > 0) out << ' ';
      out << values[m];
    }
    out << '\n';
  };
  for (std::size_t k = 0; k < stats.categories(); ++k) {
    write_line(stats.u(k));
  }
  write_line(stats.v());
}

CompressedStats read_stats(std::istream& in) {
  std::size_t line_no = 0;
  std::string line;
  const auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      throw ParseError("unexpected end of stats file", line_no + 1);
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  {
    std::istringstream magic(next_line());
    std::string word;
    int version = 0;
    if (!(magic >> word >> version) || word != kStatsMagic) {
      throw ParseError("not a stats file (expected '" + std::string(kStatsMagic) + " " +
                           std::to_string(kStatsVersion) + "')",
                       line_no);
    }
    if (version != kStatsVersion) {
      throw ParseError("unsupported stats format version " + std::to_string(version), line_no);
    }
  }

  std::size_t categories = 0;
  std::size_t big_m = 0;
  std::uint64_t rows = 0;
  std::uint64_t effective = 0;
  {
    std::istringstream header(next_line());
    std::string extra;
    if (!(header >> categories >> big_m >> rows >> effective) || (header >> extra)) {
      throw ParseError("header must be 'K M N N_effective'", line_no);
    }
    if (categories == 0) throw ParseError("K must be >= 1", line_no);
  }

  const auto read_tallies = [&]() {
    std::istringstream fields(next_line());
    std::vector<Count> values;
    values.reserve(big_m);
    Count t = 0;
    while (fields >> t) values.push_back(t);
    if (!fields.eof()) throw ParseError("non-integer tally", line_no);
    if (values.size() != big_m) {
      throw ParseError("expected " + std::to_string(big_m) + " tallies, found " +
                           std::to_string(values.size()),
                       line_no);
    }
    return values;
  };

  std::vector<std::vector<Count>> u;
  u.reserve(categories);
  for (std::size_t k = 0; k < categories; ++k) u.push_back(read_tallies());
  std::vector<Count> v = read_tallies();
  try {
    return CompressedStats::from_parts(std::move(u), std::move(v), rows, effective);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), line_no);
  }
}

}  // namespace dmfit
