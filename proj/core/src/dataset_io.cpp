#include "dmfit/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <istream>
#include <iterator>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "dmfit/errors.hpp"

namespace dmfit {

namespace {

// Reads lines, stripping a trailing '\r', and tracks the 1-based line number.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  bool next(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::istream& in_;
  std::size_t line_no_ = 0;
};

bool is_blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

bool is_comment(std::string_view s) {
  const auto first = s.find_first_not_of(" \t");
  return first != std::string_view::npos && s[first] == '#';
}

std::vector<std::string_view> split_fields(std::string_view line, bool allow_commas) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  const auto is_sep = [allow_commas](char c) {
    return c == ' ' || c == '\t' || (allow_commas && c == ',');
  };
  while (i < line.size()) {
    while (i < line.size() && is_sep(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_sep(line[j])) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename T>
T parse_number(std::string_view token, std::size_t line_no, const char* what) {
  T value{};
  const char* begin = token.data();
  const char* end = token.data() + token.size();
  if (!token.empty() && token.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ParseError("invalid " + std::string(what) + " '" + std::string(token) + "'", line_no);
  }
  return value;
}

Count parse_count(std::string_view token, std::size_t line_no) {
  const auto c = parse_number<Count>(token, line_no, "count");
  if (c < 0) throw ParseError("negative count '" + std::string(token) + "'", line_no);
  return c;
}

std::string slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

DatasetFormat detect_from_text(const std::string& text) {
  std::istringstream in(text);
  LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    if (is_blank(line) || is_comment(line)) continue;
    const auto fields = split_fields(line, false);
    if (fields.empty()) continue;
    if (fields[0] == kStatsMagic) return DatasetFormat::kStats;
    if (fields[0] == "K") return DatasetFormat::kSparse;
    return DatasetFormat::kDense;
  }
  return DatasetFormat::kDense;
}

std::string format_double(double x, int digits) {
  std::ostringstream s;
  s << std::setprecision(digits) << x;
  return s.str();
}

}  // namespace

std::string_view format_name(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::kAuto: return "auto";
    case DatasetFormat::kDense: return "dense";
    case DatasetFormat::kSparse: return "sparse";
    case DatasetFormat::kStats: return "stats";
    case DatasetFormat::kProb: return "prob";
  }
  return "unknown";
}

std::optional<DatasetFormat> parse_format(std::string_view name) {
  for (auto f : {DatasetFormat::kAuto, DatasetFormat::kDense, DatasetFormat::kSparse,
                 DatasetFormat::kStats, DatasetFormat::kProb}) {
    if (format_name(f) == name) return f;
  }
  return std::nullopt;
}

CountMatrix read_dense(std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::optional<CountMatrix> data;
  std::vector<Count> row;
  while (reader.next(line)) {
    if (is_blank(line) || is_comment(line)) continue;
    const auto fields = split_fields(line, true);
    row.clear();
    for (auto token : fields) row.push_back(parse_count(token, reader.line_no()));
    if (!data) data.emplace(row.size());
    if (row.size() != data->categories()) {
      throw ParseError("expected " + std::to_string(data->categories()) + " counts, found " +
                           std::to_string(row.size()),
                       reader.line_no());
    }
    data->push_row(row);
  }
  if (!data) throw ParseError("no data rows", reader.line_no() + 1);
  return std::move(*data);
}

CountMatrix read_sparse(std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::size_t categories = 0;
  while (reader.next(line)) {
    if (is_blank(line) || is_comment(line)) continue;
    const auto fields = split_fields(line, false);
    if (fields.size() != 2 || fields[0] != "K") {
      throw ParseError("sparse data must start with a 'K <value>' header", reader.line_no());
    }
    categories = parse_number<std::size_t>(fields[1], reader.line_no(), "category count");
    if (categories == 0) throw ParseError("K must be >= 1", reader.line_no());
    break;
  }
  if (categories == 0) throw ParseError("missing 'K <value>' header", reader.line_no() + 1);

  CountMatrix data(categories);
  std::vector<Count> row(categories);
  std::vector<bool> seen(categories);
  while (reader.next(line)) {
    if (is_comment(line)) continue;
    std::fill(row.begin(), row.end(), 0);
    std::fill(seen.begin(), seen.end(), false);
    for (auto token : split_fields(line, false)) {
      const auto colon = token.find(':');
      if (colon == std::string_view::npos) {
        throw ParseError("expected 'index:count', got '" + std::string(token) + "'",
                         reader.line_no());
      }
      const auto index =
          parse_number<std::size_t>(token.substr(0, colon), reader.line_no(), "index");
      if (index >= categories) {
        throw ParseError("index " + std::to_string(index) + " outside [0, " +
                             std::to_string(categories) + ")",
                         reader.line_no());
      }
      if (seen[index]) {
        throw ParseError("index " + std::to_string(index) + " repeated", reader.line_no());
      }
      seen[index] = true;
      row[index] = parse_count(token.substr(colon + 1), reader.line_no());
    }
    data.push_row(row);
  }
  return data;
}

ProbabilityMatrix read_prob(std::istream& in) {
  LineReader reader(in);
  std::string line;
  std::optional<ProbabilityMatrix> data;
  std::vector<double> row;
  while (reader.next(line)) {
    if (is_blank(line) || is_comment(line)) continue;
    row.clear();
    for (auto token : split_fields(line, true)) {
      row.push_back(parse_number<double>(token, reader.line_no(), "probability"));
    }
    try {
      if (!data) data.emplace(row.size());
      data->push_row(row);
    } catch (const std::invalid_argument& e) {  // DimensionError
      throw ParseError(e.what(), reader.line_no());
    } catch (const std::domain_error& e) {
      throw ParseError(e.what(), reader.line_no());
    }
  }
  if (!data) throw ParseError("no data rows", reader.line_no() + 1);
  return std::move(*data);
}

void write_dense(std::ostream& out, const CountMatrix& data) {
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out << ' ';
      out << row[k];
    }
    out << '\n';
  }
}

void write_sparse(std::ostream& out, const CountMatrix& data) {
  out << "K " << data.categories() << '\n';
  for (std::size_t n = 0; n < data.rows(); ++n) {
    const auto row = data.row(n);
    bool first = true;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (row[k] == 0) continue;
      if (!first) out << ' ';
      out << k << ':' << row[k];
      first = false;
    }
    out << '\n';
  }
}

DatasetFormat detect_format(std::istream& in) { return detect_from_text(slurp(in)); }

Dataset read_dataset(std::istream& in, DatasetFormat format) {
  if (format == DatasetFormat::kAuto) {
    const std::string text = slurp(in);
    std::istringstream buffered(text);
    return read_dataset(buffered, detect_from_text(text));
  }
  switch (format) {
    case DatasetFormat::kDense: return read_dense(in);
    case DatasetFormat::kSparse: return read_sparse(in);
    case DatasetFormat::kStats: return read_stats(in);
    case DatasetFormat::kProb: return read_prob(in);
    case DatasetFormat::kAuto: break;
  }
  throw std::logic_error("read_dataset: unhandled format");
}

Dataset load_dataset(const std::string& path, DatasetFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return read_dataset(in, format);
}

void write_report(std::ostream& out, const ReportContext& context, const SolverReport& report) {
  constexpr int kDigits = std::numeric_limits<double>::max_digits10;
  out << kReportMagic << '\n';
  out << "method: " << context.method << '\n';
  out << "input_format: " << format_name(context.input_format) << '\n';
  out << "K: " << context.categories << '\n';
  out << "N: " << context.rows << '\n';
  out << "N_effective: " << context.effective_rows << '\n';
  if (context.max_total) out << "M: " << *context.max_total << '\n';
  out << "converged: " << (report.converged ? "true" : "false") << '\n';
  out << "iterations: " << report.iterations << '\n';
  out << "final_grad_norm: " << format_double(report.final_grad_norm, 6) << '\n';
  out << "objective: " << format_double(report.objective, kDigits) << '\n';
  out << "alpha_hat: ";
  for (std::size_t k = 0; k < report.alpha_hat.size(); ++k) {
    if (k > 0) out << ',';
    out << format_double(report.alpha_hat[k], kDigits);
  }
  out << '\n';
  out << "precompute_seconds: " << format_double(report.timings.precompute_seconds, 6) << '\n';
  out << "solve_seconds: " << format_double(report.timings.solve_seconds, 6) << '\n';
}

}  // namespace dmfit
