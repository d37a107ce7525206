#include "sparsecol/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "sparsecol/error.hpp"

namespace sparsecol {

std::string to_string(Strategy s) {
  switch (s) {
  case Strategy::GG: return "GG";
  case Strategy::GNEnvelope: return "GN_envelope";
  case Strategy::GNProfit: return "GN_profit";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "GG") return Strategy::GG;
  if (name == "GN_envelope" || name == "GN") return Strategy::GNEnvelope;
  if (name == "GN_profit") return Strategy::GNProfit;
  throw ConfigError("unknown strategy '" + name + "'");
}

std::size_t argmax_index(const std::vector<MultiIndex>& candidates, const std::vector<double>& values) {
  if (candidates.empty()) throw InvalidSet("argmax over an empty candidate set");
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (values[i] > values[best] || (values[i] == values[best] && candidates[i] < candidates[best])) best = i;
  }
  return best;
}

namespace {

using Clock = std::chrono::steady_clock;

PointEvaluator solver_for(SolveCache& cache) {
  return [&cache](const MultiIndex& j, std::span<const double> y) { return cache.get(j, y); };
}

double max_of(const std::vector<double>& v) { return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end()); }

void log_iteration(const AdaptiveConfig& config, const IterationRecord& r) {
  if (!config.verbose) return;
  if (r.reference_error)
    std::fprintf(stderr, "[%s] n=%d |L|=%zu solves=%zu eta=%.6e err=%.6e\n", to_string(config.strategy).c_str(), r.n,
                 r.index_set.size(), r.solves, r.report.total, *r.reference_error);
  else
    std::fprintf(stderr, "[%s] n=%d |L|=%zu solves=%zu eta=%.6e\n", to_string(config.strategy).c_str(), r.n,
                 r.index_set.size(), r.solves, r.report.total);
}

bool want_reference(const AdaptiveConfig& config, int n) {
  return config.reference != nullptr && config.reference_every > 0 && n % config.reference_every == 0;
}

void validate(const AdaptiveConfig& config) {
  if (!(config.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
  if (config.max_iterations < 1 || config.max_solves < 1) throw ConfigError("budgets must be at least 1");
  if (config.doerfler_fraction < 0.0 || config.doerfler_fraction > 1.0)
    throw ConfigError("doerfler_fraction must lie in [0,1]");
}

AdaptiveTrace run_residual(const DiffusionProblem& problem, const SpatialDiscretization& disc,
                           const AdaptiveConfig& config, bool use_profit) {
  validate(config);
  AdaptiveTrace trace;
  trace.strategy = config.strategy;
  trace.a_min = check_ellipticity(problem, disc).a_min;
  trace.stopping_rule = "sum over margin of eta <= tolerance, or iteration/solve budget";

  const auto family = NodeFamily::get(config.nodes);
  SolveCache cache(disc);
  SparseInterpolant un(family, problem.dim(), disc.dofs());
  un.add_index(MultiIndex::zero(problem.dim()), solver_for(cache), config.parallelism);

  for (int n = 0;; ++n) {
    const auto start = Clock::now();
    IterationRecord rec;
    rec.n = n;
    rec.index_set = un.index_set().members();
    const IndexSet& marg = un.index_set().margin();
    const std::vector<MultiIndex> cand(marg.begin(), marg.end());
    rec.candidate_count = cand.size();

    ResidualEstimator est(un, disc, config.norm, config.parallelism);
    rec.report.candidates = cand;
    rec.report.eta = est.eta_all(cand);
    rec.report.total = std::accumulate(rec.report.eta.begin(), rec.report.eta.end(), 0.0);
    rec.report.max = max_of(rec.report.eta);
    double reduced_max = 0.0;
    std::map<MultiIndex, double> eta_of;
    for (std::size_t c = 0; c < cand.size(); ++c) {
      eta_of[cand[c]] = rec.report.eta[c];
      rec.report.work.push_back(work(config.nodes, cand[c]));
      if (un.index_set().in_reduced_margin(cand[c])) reduced_max = std::max(reduced_max, rec.report.eta[c]);
    }
    rec.report.margin_ratio = reduced_max > 0.0 ? rec.report.max / reduced_max : 1.0;
    std::vector<IndexSet> envelopes;
    for (const auto& k : cand) {
      envelopes.push_back(monotone_envelope(un.index_set(), k));
      rec.report.profit.push_back(profit(config.nodes, envelopes.back(), eta_of));
    }

    rec.solves = cache.size();
    rec.grid_size = un.num_points();
    if (want_reference(config, n)) rec.reference_error = config.reference->error(un, config.norm);

    const bool done = rec.report.total <= config.tolerance;
    const bool out_of_budget = n >= config.max_iterations || cache.size() >= config.max_solves;
    if (!done && !out_of_budget) {
      const std::size_t best = argmax_index(cand, use_profit ? rec.report.profit : rec.report.eta);
      rec.k_star = cand[best];
      rec.marked = envelopes[best];
      for (const auto& i : [&] {
             std::vector<MultiIndex> v(rec.marked.begin(), rec.marked.end());
             std::sort(v.begin(), v.end(), admissible_order);
             return v;
           }())
        un.add_index(i, solver_for(cache), config.parallelism);
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    log_iteration(config, rec);
    if (config.on_iteration) config.on_iteration(rec);
    trace.iterations.push_back(std::move(rec));
    if (done) {
      trace.converged = true;
      break;
    }
    if (out_of_budget) {
      trace.budget_exhausted = true;
      break;
    }
  }
  trace.final_solves = cache.size();
  trace.final_reference_error = trace.iterations.back().reference_error;
  if (!trace.final_reference_error && config.reference) trace.final_reference_error = config.reference->error(un, config.norm);
  trace.final_interpolant.emplace(std::move(un));
  return trace;
}

} // namespace

AdaptiveTrace run_gn(const DiffusionProblem& problem, const SpatialDiscretization& disc, const AdaptiveConfig& config) {
  if (config.strategy != Strategy::GNEnvelope) throw ConfigError("run_gn needs strategy GN_envelope");
  return run_residual(problem, disc, config, false);
}

AdaptiveTrace run_gn_profit(const DiffusionProblem& problem, const SpatialDiscretization& disc,
                            const AdaptiveConfig& config) {
  if (config.strategy != Strategy::GNProfit) throw ConfigError("run_gn_profit needs strategy GN_profit");
  return run_residual(problem, disc, config, true);
}

AdaptiveTrace run_gg(const DiffusionProblem& problem, const SpatialDiscretization& disc, const AdaptiveConfig& config) {
  if (config.strategy != Strategy::GG) throw ConfigError("run_gg needs strategy GG");
  validate(config);
  AdaptiveTrace trace;
  trace.strategy = Strategy::GG;
  trace.a_min = check_ellipticity(problem, disc).a_min;
  trace.stopping_rule = "sum over reduced margin of ||Delta_k u|| <= tolerance, or iteration/solve budget";

  const auto family = NodeFamily::get(config.nodes);
  SolveCache cache(disc);
  SparseInterpolant un(family, problem.dim(), disc.dofs());
  un.add_index(MultiIndex::zero(problem.dim()), solver_for(cache), config.parallelism);
  // Delta_k u does not depend on Lambda once k is in the reduced margin.
  std::map<MultiIndex, double> indicator;

  for (int n = 0;; ++n) {
    const auto start = Clock::now();
    IterationRecord rec;
    rec.n = n;
    rec.index_set = un.index_set().members();
    const IndexSet& rm = un.index_set().reduced_margin();
    const std::vector<MultiIndex> cand(rm.begin(), rm.end());
    rec.candidate_count = cand.size();
    for (const auto& k : cand)
      if (!indicator.count(k)) indicator[k] = surplus_indicator(un, disc, cache, k, config.norm, config.parallelism);

    rec.report.candidates = cand;
    for (const auto& k : cand) {
      rec.report.eta.push_back(indicator.at(k));
      rec.report.work.push_back(work(config.nodes, k));
      rec.report.profit.push_back(indicator.at(k) / static_cast<double>(work(config.nodes, k)));
    }
    rec.report.total = std::accumulate(rec.report.eta.begin(), rec.report.eta.end(), 0.0);
    rec.report.max = max_of(rec.report.eta);
    rec.solves = cache.size();
    rec.grid_size = un.num_points();
    if (want_reference(config, n)) rec.reference_error = config.reference->error(un, config.norm);

    const bool done = rec.report.total <= config.tolerance;
    const bool out_of_budget = n >= config.max_iterations || cache.size() >= config.max_solves;
    if (!done && !out_of_budget) {
      const std::size_t best = argmax_index(cand, rec.report.eta);
      rec.k_star = cand[best];
      if (config.doerfler_fraction > 0.0) {
        std::vector<std::size_t> order(cand.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return rec.report.eta[a] > rec.report.eta[b]; });
        const auto count = static_cast<std::size_t>(
            std::max(1.0, std::ceil(config.doerfler_fraction * static_cast<double>(cand.size()))));
        for (std::size_t c = 0; c < count; ++c) rec.marked.insert(cand[order[c]]);
      } else {
        rec.marked.insert(cand[best]);
      }
      for (const auto& k : rec.marked) un.add_index(k, solver_for(cache), config.parallelism);
    }
    rec.wall_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    log_iteration(config, rec);
    if (config.on_iteration) config.on_iteration(rec);
    trace.iterations.push_back(std::move(rec));
    if (done) {
      trace.converged = true;
      break;
    }
    if (out_of_budget) {
      trace.budget_exhausted = true;
      break;
    }
  }

  if (config.reference) {
    trace.pre_augmentation_reference_error = trace.iterations.back().reference_error;
    if (!trace.pre_augmentation_reference_error)
      trace.pre_augmentation_reference_error = config.reference->error(un, config.norm);
  }
  // Augment with the explored reduced margin; every solve is already cached.
  const IndexSet rm = un.index_set().reduced_margin();
  for (const auto& k : rm) un.add_index(k, solver_for(cache), config.parallelism);
  trace.final_solves = cache.size();
  if (config.reference) trace.final_reference_error = config.reference->error(un, config.norm);
  trace.final_interpolant.emplace(std::move(un));
  return trace;
}

AdaptiveTrace run_adaptive(const DiffusionProblem& problem, const SpatialDiscretization& disc,
                           const AdaptiveConfig& config) {
  switch (config.strategy) {
  case Strategy::GG: return run_gg(problem, disc, config);
  case Strategy::GNEnvelope: return run_gn(problem, disc, config);
  case Strategy::GNProfit: return run_gn_profit(problem, disc, config);
  }
  throw ConfigError("unknown strategy");
}

} // namespace sparsecol
