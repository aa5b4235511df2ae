// dmfit: fit Dirichlet / Dirichlet-multinomial parameters, export compressed
// count statistics, synthesize datasets and run runtime sweeps.
//
// Exit codes:
//   0  success (fit converged)
//   1  usage error
//   2  input error (unreadable or malformed file, bad values)
//   3  fit did not converge within --max-iters
//   4  divergence: the MLE is unbounded (alpha exceeded --alpha-cap)
//   5  degenerate data: no counts, or a category that is never observed

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dmfit/bench.hpp"
#include "dmfit/compressed_stats.hpp"
#include "dmfit/dataset_io.hpp"
#include "dmfit/dirichlet.hpp"
#include "dmfit/dm_solver.hpp"
#include "dmfit/errors.hpp"
#include "dmfit/sampling.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInputError = 2,
  kNotConverged = 3,
  kDiverged = 4,
  kDegenerate = 5,
};

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    const double x = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number '" + item + "'");
    out.push_back(x);
  }
  return out;
}

dmfit::DatasetFormat to_format(const std::string& name) {
  const auto f = dmfit::parse_format(name);
  if (!f) throw CLI::ValidationError("--format", "unknown format '" + name + "'");
  return *f;
}

dmfit::Method to_method(const std::string& name) {
  const auto m = dmfit::parse_method(name);
  if (!m) throw CLI::ValidationError("--method", "unknown method '" + name + "'");
  return *m;
}

struct FitOptions {
  std::string input;
  std::string format = "auto";
  std::string method = "newton-compressed";
  double tol = 1e-10;
  int max_iters = 1000;
  std::string init = "ones";
  double alpha_cap = 1e7;
};

int run_fit(const FitOptions& opt) {
  dmfit::SolverConfig config;
  config.method = to_method(opt.method);
  config.tol = opt.tol;
  config.max_iters = opt.max_iters;
  config.alpha_cap = opt.alpha_cap;
  config.validate();
  const bool moment_init = opt.init == "moments";
  if (opt.init != "ones" && !moment_init) config.init = parse_real_list(opt.init);

  const auto format = to_format(opt.format);
  const dmfit::Dataset dataset = dmfit::load_dataset(opt.input, format);

  dmfit::ReportContext context;
  context.method = std::string(dmfit::method_name(config.method));
  std::optional<dmfit::SolverReport> report;

  if (const auto* probs = std::get_if<dmfit::ProbabilityMatrix>(&dataset)) {
    if (moment_init) {
      const auto start = dmfit::dirichlet_moment_init(*probs);
      config.init = std::vector<double>(start.values().begin(), start.values().end());
    }
    context.method = "dirichlet-newton";
    context.input_format = dmfit::DatasetFormat::kProb;
    context.categories = probs->categories();
    context.rows = context.effective_rows = probs->rows();
    report = dmfit::fit_dirichlet(*probs, config);
  } else {
    if (moment_init) {
      throw std::invalid_argument("--init moments is only available for --format prob");
    }
    if (const auto* counts = std::get_if<dmfit::CountMatrix>(&dataset)) {
      const auto stats = dmfit::build_compressed(*counts);
      context.input_format = format;
      if (format == dmfit::DatasetFormat::kAuto) {
        std::ifstream in(opt.input);
        context.input_format = dmfit::detect_format(in);
      }
      context.categories = stats.categories();
      context.rows = stats.rows();
      context.effective_rows = stats.effective_rows();
      context.max_total = stats.max_total();
      report = dmfit::fit_dm(*counts, config);
    } else {
      const auto& stats = std::get<dmfit::CompressedStats>(dataset);
      context.input_format = dmfit::DatasetFormat::kStats;
      context.categories = stats.categories();
      context.rows = stats.rows();
      context.effective_rows = stats.effective_rows();
      context.max_total = stats.max_total();
      report = dmfit::fit_dm(stats, config);
    }
  }
  dmfit::write_report(std::cout, context, *report);
  return report->converged ? kOk : kNotConverged;
}

dmfit::CompressedStats stats_of(const dmfit::Dataset& dataset, std::size_t threads) {
  if (const auto* counts = std::get_if<dmfit::CountMatrix>(&dataset)) {
    return dmfit::build_compressed_parallel(*counts, threads);
  }
  if (const auto* stats = std::get_if<dmfit::CompressedStats>(&dataset)) return *stats;
  throw std::invalid_argument("probability data has no count statistics");
}

int run_stats(const std::vector<std::string>& inputs, const std::string& format_name,
              const std::string& output, std::size_t threads) {
  const auto format = to_format(format_name);
  std::optional<dmfit::CompressedStats> total;
  for (const auto& path : inputs) {
    auto part = stats_of(dmfit::load_dataset(path, format), threads);
    if (total) {
      *total += part;
    } else {
      total = std::move(part);
    }
  }
  if (output.empty() || output == "-") {
    dmfit::write_stats(std::cout, *total);
  } else {
    std::ofstream out(output);
    if (!out) throw std::runtime_error("cannot write '" + output + "'");
    dmfit::write_stats(out, *total);
  }
  return kOk;
}

struct SampleOptions {
  std::string alpha = "3,1,2";
  std::size_t rows = 100;
  dmfit::Count total = 10;
  std::string total_range;
  std::uint64_t seed = 1;
  std::string format = "dense";
  std::string output;
  std::size_t threads = 1;
};

int run_sample(const SampleOptions& opt) {
  dmfit::RowTotalSpec row_total = dmfit::RowTotalSpec::fixed(opt.total);
  if (!opt.total_range.empty()) {
    const auto colon = opt.total_range.find(':');
    if (colon == std::string::npos) {
      throw std::invalid_argument("--total-range must be LOW:HIGH");
    }
    row_total = dmfit::RowTotalSpec::uniform(std::stoll(opt.total_range.substr(0, colon)),
                                             std::stoll(opt.total_range.substr(colon + 1)));
  }
  const dmfit::SynthSpec spec{dmfit::DirichletParams(parse_real_list(opt.alpha)), opt.rows,
                              row_total, opt.seed};
  const auto data = dmfit::synthesize(spec, opt.threads);
  const auto format = to_format(opt.format);
  if (format != dmfit::DatasetFormat::kDense && format != dmfit::DatasetFormat::kSparse) {
    throw std::invalid_argument("sample writes dense or sparse data only");
  }

  const bool to_stdout = opt.output.empty() || opt.output == "-";
  std::ofstream file;
  if (!to_stdout) {
    file.open(opt.output);
    if (!file) throw std::runtime_error("cannot write '" + opt.output + "'");
  }
  std::ostream& out = to_stdout ? std::cout : file;
  if (format == dmfit::DatasetFormat::kDense) {
    dmfit::write_dense(out, data);
  } else {
    dmfit::write_sparse(out, data);
  }

  std::ostream& echo = to_stdout ? std::cerr : std::cout;
  echo << "alpha: " << opt.alpha << '\n'
       << "K: " << spec.alpha.size() << '\n'
       << "N: " << spec.rows << '\n'
       << "row_total: " << row_total.low;
  if (row_total.high != row_total.low) echo << ':' << row_total.high;
  echo << '\n' << "seed: " << spec.seed << '\n' << "format: " << opt.format << '\n';
  return kOk;
}

struct BenchOptions {
  std::string sweep = "N";
  std::int64_t from = 100;
  std::int64_t to = 102400;
  double factor = 2.0;
  std::string methods = "newton-compressed,fp-naive";
  std::size_t rows = 5000;
  std::int64_t total = 10;
  std::string alpha = "3,1,2";
  std::uint64_t seed = 1;
  int repeats = 3;
  double min_batch_seconds = 0.02;
  double tol = 1e-10;
  int max_iters = 1000;
};

int run_bench(const BenchOptions& opt) {
  dmfit::BenchConfig config;
  const auto sweep = dmfit::parse_sweep(opt.sweep);
  if (!sweep) throw CLI::ValidationError("--sweep", "expected N, M or K");
  config.sweep = *sweep;
  config.points = dmfit::sweep_points(opt.from, opt.to, opt.factor);
  config.methods.clear();
  std::stringstream list(opt.methods);
  std::string name;
  while (std::getline(list, name, ',')) config.methods.push_back(to_method(name));
  config.rows = opt.rows;
  config.row_total = opt.total;
  config.alpha = parse_real_list(opt.alpha);
  config.seed = opt.seed;
  config.repeats = opt.repeats;
  config.min_batch_seconds = opt.min_batch_seconds;
  config.solver.tol = opt.tol;
  config.solver.max_iters = opt.max_iters;
  dmfit::write_bench_csv(std::cout, dmfit::run_bench(config));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Maximum-likelihood fitting of Dirichlet and Dirichlet-multinomial parameters"};
  app.require_subcommand(1);

  const std::vector<std::string> kFormats{"auto", "dense", "sparse", "stats", "prob"};
  const std::vector<std::string> kMethods{"newton-compressed", "fp-compressed", "fp-naive",
                                          "newton-naive"};

  FitOptions fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit alpha and print a key-value report");
  fit_cmd->add_option("input", fit.input, "Dataset file")->required();
  fit_cmd->add_option("--format", fit.format, "Input format")
      ->check(CLI::IsMember(kFormats))
      ->capture_default_str();
  fit_cmd->add_option("--method", fit.method, "Fitting algorithm")
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  fit_cmd->add_option("--tol", fit.tol, "Gradient infinity-norm tolerance")->capture_default_str();
  fit_cmd->add_option("--max-iters", fit.max_iters, "Iteration limit")->capture_default_str();
  fit_cmd->add_option("--init", fit.init, "'ones', 'moments' (prob data) or a comma list")
      ->capture_default_str();
  fit_cmd->add_option("--alpha-cap", fit.alpha_cap, "Divergence threshold")->capture_default_str();

  std::vector<std::string> stats_inputs;
  std::string stats_format = "auto";
  std::string stats_output;
  std::size_t stats_threads = 1;
  auto* stats_cmd =
      app.add_subcommand("stats", "Write the compressed (U, v) statistics; several inputs merge");
  stats_cmd->add_option("inputs", stats_inputs, "Dataset or stats files")->required();
  stats_cmd->add_option("--format", stats_format, "Input format")
      ->check(CLI::IsMember(kFormats))
      ->capture_default_str();
  stats_cmd->add_option("-o,--output", stats_output, "Output path (default stdout)");
  stats_cmd->add_option("--threads", stats_threads, "Worker threads per input")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  SampleOptions sample;
  auto* sample_cmd = app.add_subcommand("sample", "Synthesize Dirichlet-multinomial count data");
  sample_cmd->add_option("--alpha", sample.alpha, "Dirichlet parameter, comma list")
      ->capture_default_str();
  sample_cmd->add_option("--rows,-N", sample.rows, "Number of rows")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sample_cmd->add_option("--total,-M", sample.total, "Fixed row total")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  sample_cmd->add_option("--total-range", sample.total_range, "Uniform row totals LOW:HIGH");
  sample_cmd->add_option("--seed", sample.seed, "RNG seed")->capture_default_str();
  sample_cmd->add_option("--format", sample.format, "dense or sparse")
      ->check(CLI::IsMember({"dense", "sparse"}))
      ->capture_default_str();
  sample_cmd->add_option("-o,--output", sample.output, "Output path (default stdout)");
  sample_cmd->add_option("--threads", sample.threads, "Worker threads")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Runtime sweep over N, M or K; CSV on stdout");
  bench_cmd->add_option("--sweep", bench.sweep, "Sweep variable")
      ->check(CLI::IsMember({"N", "M", "K"}))
      ->capture_default_str();
  bench_cmd->add_option("--from", bench.from, "First sweep value")->capture_default_str();
  bench_cmd->add_option("--to", bench.to, "Last sweep value")->capture_default_str();
  bench_cmd->add_option("--factor", bench.factor, "Multiplicative step")->capture_default_str();
  bench_cmd->add_option("--methods", bench.methods, "Comma list of methods")
      ->capture_default_str();
  bench_cmd->add_option("--rows,-N", bench.rows, "N when not swept")->capture_default_str();
  bench_cmd->add_option("--total,-M", bench.total, "Row total when not swept")
      ->capture_default_str();
  bench_cmd->add_option("--alpha", bench.alpha, "Dirichlet parameter for N/M sweeps")
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench.seed, "RNG seed")->capture_default_str();
  bench_cmd->add_option("--repeats", bench.repeats, "Timed batches per point (median)")
      ->capture_default_str();
  bench_cmd->add_option("--min-batch-seconds", bench.min_batch_seconds,
                        "Minimum wall time per timed batch")
      ->capture_default_str();
  bench_cmd->add_option("--tol", bench.tol, "Gradient tolerance")->capture_default_str();
  bench_cmd->add_option("--max-iters", bench.max_iters, "Iteration limit")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*stats_cmd) return run_stats(stats_inputs, stats_format, stats_output, stats_threads);
    if (*sample_cmd) return run_sample(sample);
    if (*bench_cmd) return run_bench(bench);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const dmfit::DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDiverged;
  } catch (const dmfit::FitError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kUsage;
}
