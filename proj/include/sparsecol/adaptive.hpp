#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sparsecol/diffusion.hpp"
#include "sparsecol/estimators.hpp"
#include "sparsecol/multi_index.hpp"
#include "sparsecol/nodes.hpp"
#include "sparsecol/sparse_interpolant.hpp"

namespace sparsecol {

enum class Strategy {
  GG,          ///< reduced-margin surplus indicators, argmax marking
  GNEnvelope,  ///< full-margin residual estimator, envelope of the argmax
  GNProfit,    ///< as GNEnvelope with envelope-averaged, work-normalized profits
};

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct IterationRecord {
  int n = 0;
  IndexSet index_set;
  std::size_t candidate_count = 0;
  IndexSet marked;
  std::optional<MultiIndex> k_star;
  EstimatorReport report;
  std::size_t solves = 0;
  std::size_t grid_size = 0;
  std::optional<double> reference_error;
  double wall_ms = 0.0;
};

struct AdaptiveConfig {
  Strategy strategy = Strategy::GNEnvelope;
  NormSpec norm;
  /// Stop once the total estimator (sum over candidates) is at most this.
  double tolerance = 1e-8;
  int max_iterations = 200;
  std::size_t max_solves = 100000;
  NodeKind nodes = NodeKind::Leja;
  unsigned parallelism = 1;
  /// GG only: mark this fraction of the reduced margin (largest indicators
  /// first) instead of the single maximizer. 0 disables.
  double doerfler_fraction = 0.0;
  /// Optional reference solution; evaluated every `reference_every` iterations.
  const ReferenceSolution* reference = nullptr;
  int reference_every = 1;
  bool verbose = false;
  /// Called once per iteration, after the record is complete.
  std::function<void(const IterationRecord&)> on_iteration;
};

struct AdaptiveTrace {
  Strategy strategy = Strategy::GNEnvelope;
  std::vector<IterationRecord> iterations;
  bool converged = false;
  bool budget_exhausted = false;
  double a_min = 0.0;
  /// Final interpolant; for GG this is the augmented S_{Lambda u RMarg(Lambda)}.
  std::optional<SparseInterpolant> final_interpolant;
  std::size_t final_solves = 0;
  std::optional<double> final_reference_error;
  /// GG only: reference error of S_Lambda u before the augmentation.
  std::optional<double> pre_augmentation_reference_error;
  std::string stopping_rule;
};

/// Dispatches on config.strategy. Lambda_0 = {0}.
AdaptiveTrace run_adaptive(const DiffusionProblem& problem, const SpatialDiscretization& disc,
                           const AdaptiveConfig& config);

AdaptiveTrace run_gg(const DiffusionProblem& problem, const SpatialDiscretization& disc, const AdaptiveConfig& config);
AdaptiveTrace run_gn(const DiffusionProblem& problem, const SpatialDiscretization& disc, const AdaptiveConfig& config);
AdaptiveTrace run_gn_profit(const DiffusionProblem& problem, const SpatialDiscretization& disc,
                            const AdaptiveConfig& config);

/// Lexicographically smallest maximizer.
std::size_t argmax_index(const std::vector<MultiIndex>& candidates, const std::vector<double>& values);

} // namespace sparsecol
