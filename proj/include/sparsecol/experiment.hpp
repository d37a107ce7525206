#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsecol/adaptive.hpp"
#include "sparsecol/error.hpp"

namespace sparsecol {

class CompareError : public Error {
public:
  using Error::Error;
};

struct ExperimentConfig {
  /// {"M", "coefficient": {...}, "rhs": {...}}, normalized with defaults.
  nlohmann::json problem;
  std::size_t mesh = 256;
  NodeKind nodes = NodeKind::Leja;
  double p = 2.0;
  std::vector<Strategy> strategies{Strategy::GNEnvelope, Strategy::GG};
  double tolerance = 1e-8;
  int max_iterations = 200;
  std::size_t max_solves = 100000;
  int reference_order = 20;
  double doerfler_fraction = 0.0;
  unsigned parallelism = 1;
  std::string outdir = "results";
  std::uint64_t seed = 12345;

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

/// Every field with its default value.
nlohmann::json default_config_json();

/// Parses a JSON document; syntax errors become ConfigError with a line number.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// 16 hex digits, FNV-1a over the canonical dump of problem, mesh and p.
std::string problem_hash(const ExperimentConfig& config);

/// Reference error every this many iterations; 0 means never.
int reference_cadence(std::size_t dim, bool force);

struct RunOptions {
  std::optional<std::string> outdir;
  std::optional<unsigned> parallelism;
  bool force_reference = false;
  bool verbose = false;
};

struct StrategyOutcome {
  Strategy strategy;
  AdaptiveTrace trace;
  std::filesystem::path trace_csv;
  std::filesystem::path final_set;
};

struct ExperimentResult {
  int exit_code = 0;
  std::vector<StrategyOutcome> outcomes;
  nlohmann::json summary;
};

/// Runs every configured strategy and writes <strategy>-trace.csv,
/// <strategy>-final-set.json and summary.json into the output directory.
ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options);

/// Exit status: 0 success, 2 budget exhausted, 3 config or ellipticity error.
int run_experiment_file(const std::filesystem::path& config_path, const RunOptions& options, std::ostream& err);

extern const std::vector<std::string> kTraceColumns;

struct TraceRow {
  int n = 0;
  std::string strategy;
  std::size_t lambda_size = 0;
  std::size_t grid_size = 0;
  std::size_t solves = 0;
  double total_estimator = 0.0;
  double max_estimator = 0.0;
  std::optional<double> reference_error;
  std::optional<double> effectivity;
  double wall_ms = 0.0;
};

struct TraceFile {
  std::string problem_hash;
  std::vector<TraceRow> rows;
};

/// Reads a trace CSV; a trailing partial line is ignored.
TraceFile read_trace(const std::filesystem::path& path);

/// Sparse interpolant saved in a final-set file.
SparseInterpolant load_final_set(const std::filesystem::path& path);

struct ComparisonTable {
  std::vector<std::string> labels;
  /// solves, then per trace its reference error and total estimator
  std::vector<std::size_t> solves;
  std::vector<std::vector<std::optional<double>>> errors;
  std::vector<std::vector<std::optional<double>>> estimators;

  std::string csv() const;
  std::string text() const;
};

/// Rows keyed by cumulative solves; throws CompareError on an empty input or
/// traces of different problems.
ComparisonTable compare_report(const std::vector<std::filesystem::path>& traces);

std::string format_double(double v);

} // namespace sparsecol
