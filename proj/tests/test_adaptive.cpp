#include <doctest.h>

#include <cmath>

#include "sparsecol/adaptive.hpp"
#include "sparsecol/error.hpp"

using namespace sparsecol;

namespace {

DiffusionProblem default_problem(std::size_t dim) { return DiffusionProblem::from_json({{"M", dim}}); }

AdaptiveConfig config_for(Strategy s, double tol = 1e-8) {
  AdaptiveConfig c;
  c.strategy = s;
  c.tolerance = tol;
  return c;
}

const Strategy kAll[] = {Strategy::GG, Strategy::GNEnvelope, Strategy::GNProfit};

void check_invariants(const AdaptiveTrace& t, NodeKind kind) {
  REQUIRE_FALSE(t.iterations.empty());
  CHECK(t.iterations.front().index_set == IndexSet{MultiIndex::zero(t.iterations.front().index_set.begin()->dim())});
  for (std::size_t n = 0; n < t.iterations.size(); ++n) {
    const auto& r = t.iterations[n];
    CHECK(r.n == static_cast<int>(n));
    CHECK(is_monotone(r.index_set));
    const auto set = MonotoneIndexSet::from(r.index_set, r.index_set.begin()->dim());
    CHECK(r.grid_size == grid_points(kind, set).size());
    double sum = 0.0;
    for (double e : r.report.eta) {
      CHECK(e >= 0.0);
      sum += e;
    }
    CHECK(r.report.total == doctest::Approx(sum).epsilon(1e-14));
    if (t.strategy == Strategy::GG) {
      CHECK(r.report.candidates == std::vector<MultiIndex>(set.reduced_margin().begin(), set.reduced_margin().end()));
      IndexSet explored = r.index_set;
      explored.insert(set.reduced_margin().begin(), set.reduced_margin().end());
      CHECK(r.solves == grid_points(kind, MonotoneIndexSet::from(explored, set.dim())).size());
    } else {
      CHECK(r.report.candidates == std::vector<MultiIndex>(set.margin().begin(), set.margin().end()));
      CHECK(r.solves == r.grid_size);
      CHECK(r.report.margin_ratio >= 1.0);
    }
    if (n > 0) CHECK(r.solves >= t.iterations[n - 1].solves);
    if (n + 1 < t.iterations.size()) {
      const auto& next = t.iterations[n + 1];
      REQUIRE(r.k_star);
      CHECK_FALSE(r.marked.empty());
      IndexSet expected = r.index_set;
      expected.insert(r.marked.begin(), r.marked.end());
      CHECK(next.index_set == expected);
      CHECK(next.index_set.size() > r.index_set.size());
      if (t.strategy == Strategy::GG) {
        CHECK(set.in_reduced_margin(*r.k_star));
      } else {
        CHECK(r.marked == monotone_envelope(set, *r.k_star));
      }
      // the selected index maximizes its indicator, ties to the smallest
      const auto& score = t.strategy == Strategy::GNProfit ? r.report.profit : r.report.eta;
      const auto pos = static_cast<std::size_t>(
          std::find(r.report.candidates.begin(), r.report.candidates.end(), *r.k_star) - r.report.candidates.begin());
      for (std::size_t c = 0; c < score.size(); ++c) {
        CHECK(score[c] <= score[pos]);
        if (score[c] == score[pos]) CHECK(r.report.candidates[c] >= *r.k_star);
      }
      if (t.strategy != Strategy::GNProfit) {
        double marked = 0.0, unmarked = 0.0;
        for (std::size_t c = 0; c < r.report.candidates.size(); ++c) {
          if (r.marked.count(r.report.candidates[c]))
            marked += r.report.eta[c];
          else
            unmarked = std::max(unmarked, r.report.eta[c]);
        }
        CHECK(unmarked <= marked);
      }
    }
  }
}

bool same_trace(const AdaptiveTrace& a, const AdaptiveTrace& b) {
  if (a.iterations.size() != b.iterations.size()) return false;
  for (std::size_t n = 0; n < a.iterations.size(); ++n) {
    const auto& x = a.iterations[n];
    const auto& y = b.iterations[n];
    if (x.index_set != y.index_set || x.marked != y.marked || x.k_star != y.k_star || x.solves != y.solves) return false;
    if (x.report.eta.size() != y.report.eta.size()) return false;
    for (std::size_t c = 0; c < x.report.eta.size(); ++c)
      if (std::abs(x.report.eta[c] - y.report.eta[c]) > 1e-15) return false;
    if (std::abs(x.report.total - y.report.total) > 1e-15) return false;
  }
  return true;
}

} // namespace

TEST_CASE("strategy names") {
  CHECK(parse_strategy("GG") == Strategy::GG);
  CHECK(parse_strategy("GN_envelope") == Strategy::GNEnvelope);
  CHECK(parse_strategy("GN_profit") == Strategy::GNProfit);
  CHECK(to_string(Strategy::GNProfit) == "GN_profit");
  CHECK_THROWS_AS(parse_strategy("greedy"), ConfigError);
}

TEST_CASE("argmax tie-break") {
  const std::vector<MultiIndex> c{{0, 2}, {1, 0}, {2, 0}};
  CHECK(argmax_index(c, {1.0, 3.0, 3.0}) == 1);
  CHECK(argmax_index({{2, 0}, {0, 1}}, {5.0, 5.0}) == 1);
  CHECK(argmax_index(c, {4.0, 3.0, 3.0}) == 0);
  CHECK_THROWS_AS(argmax_index({}, {}), InvalidSet);
}

TEST_CASE("config validation") {
  const auto p = default_problem(1);
  const SpatialDiscretization disc(p, 16);
  auto c = config_for(Strategy::GNEnvelope);
  c.tolerance = 0.0;
  CHECK_THROWS_AS(run_adaptive(p, disc, c), ConfigError);
  c = config_for(Strategy::GG);
  c.max_iterations = 0;
  CHECK_THROWS_AS(run_adaptive(p, disc, c), ConfigError);
  CHECK_THROWS_AS(run_gn(p, disc, config_for(Strategy::GG)), ConfigError);
  const auto bad = DiffusionProblem::constant(1.0, {1.0}, 1.0);
  CHECK_THROWS_AS(run_adaptive(bad, SpatialDiscretization(bad, 16), config_for(Strategy::GG)), EllipticityViolation);
}

TEST_CASE("deterministic problem stops immediately") {
  const auto p = DiffusionProblem::constant(2.0, {0.0, 0.0}, 1.0);
  const SpatialDiscretization disc(p, 64);
  for (Strategy s : kAll) {
    const auto t = run_adaptive(p, disc, config_for(s));
    CHECK(t.converged);
    REQUIRE(t.iterations.size() == 1);
    CHECK(t.iterations[0].index_set == IndexSet{{0, 0}});
    CHECK(t.iterations[0].report.total <= 1e-15);
  }
}

TEST_CASE("one-dimensional GG builds a chain with geometric decay") {
  const auto p = DiffusionProblem::constant(2.0, {1.0}, 1.0);
  const SpatialDiscretization disc(p, 64);
  const auto t = run_adaptive(p, disc, config_for(Strategy::GG));
  CHECK(t.converged);
  for (const auto& r : t.iterations) {
    IndexSet chain;
    for (int i = 0; i <= r.n; ++i) chain.insert(MultiIndex{i});
    CHECK(r.index_set == chain);
  }
  for (std::size_t n = 1; n < t.iterations.size(); ++n)
    CHECK(t.iterations[n].report.total < t.iterations[n - 1].report.total);
  check_invariants(t, NodeKind::Leja);
}

TEST_CASE("invariants on the default problem") {
  const auto p = default_problem(2);
  const SpatialDiscretization disc(p, 128);
  for (Strategy s : kAll) {
    for (NodeKind kind : {NodeKind::Leja, NodeKind::ClenshawCurtis}) {
      auto c = config_for(s, 1e-6);
      c.nodes = kind;
      const auto t = run_adaptive(p, disc, c);
      CHECK(t.converged);
      check_invariants(t, kind);
    }
  }
  auto d = config_for(Strategy::GG, 1e-6);
  d.doerfler_fraction = 0.5;
  const auto t = run_adaptive(p, disc, d);
  check_invariants(t, NodeKind::Leja);
  for (std::size_t n = 0; n + 1 < t.iterations.size(); ++n) {
    const auto& r = t.iterations[n];
    CHECK(r.marked.size() == static_cast<std::size_t>(std::ceil(0.5 * static_cast<double>(r.candidate_count))));
  }
}

TEST_CASE("profit marking coincides with envelope marking while envelopes are singletons") {
  const auto p = default_problem(2);
  const SpatialDiscretization disc(p, 64);
  const auto a = run_adaptive(p, disc, config_for(Strategy::GNEnvelope, 1e-6));
  const auto b = run_adaptive(p, disc, config_for(Strategy::GNProfit, 1e-6));
  // from {0} the margin is the reduced margin, so profits equal estimators
  CHECK(a.iterations[0].k_star == b.iterations[0].k_star);
  for (const auto& r : b.iterations) {
    const auto set = MonotoneIndexSet::from(r.index_set, 2);
    for (std::size_t c = 0; c < r.report.candidates.size(); ++c)
      if (set.in_reduced_margin(r.report.candidates[c])) CHECK(r.report.profit[c] == r.report.eta[c]);
  }
}

TEST_CASE("GN certifies its error") {
  const auto p = default_problem(2);
  const SpatialDiscretization disc(p, 256);
  const ReferenceSolution ref(disc, 20);
  auto c = config_for(Strategy::GNEnvelope);
  c.reference = &ref;
  const auto t = run_adaptive(p, disc, c);
  CHECK(t.converged);
  CHECK(t.iterations.size() <= 201);
  REQUIRE(t.final_reference_error);
  CHECK(*t.final_reference_error <= c.tolerance / t.a_min);
  for (const auto& r : t.iterations) {
    REQUIRE(r.reference_error);
    CHECK(*r.reference_error <= r.report.total / t.a_min);
  }
}

TEST_CASE("GG augmentation adds the reduced margin from cached solves") {
  const auto p = default_problem(2);
  const SpatialDiscretization disc(p, 128);
  const ReferenceSolution ref(disc, 12);
  auto c = config_for(Strategy::GG, 1e-6);
  c.reference = &ref;
  const auto t = run_adaptive(p, disc, c);
  const auto& last = t.iterations.back();
  const auto set = MonotoneIndexSet::from(last.index_set, 2);
  IndexSet augmented = last.index_set;
  augmented.insert(set.reduced_margin().begin(), set.reduced_margin().end());
  REQUIRE(t.final_interpolant);
  CHECK(t.final_interpolant->index_set().members() == augmented);
  CHECK(t.final_solves == last.solves);
  CHECK(t.final_solves == t.final_interpolant->num_points());
  REQUIRE(t.pre_augmentation_reference_error);
  REQUIRE(t.final_reference_error);
  CHECK(*t.pre_augmentation_reference_error == *last.reference_error);
}

TEST_CASE("budgets") {
  const auto p = default_problem(2);
  const SpatialDiscretization disc(p, 64);
  auto c = config_for(Strategy::GNEnvelope, 1e-14);
  c.max_iterations = 5;
  const auto t = run_adaptive(p, disc, c);
  CHECK(t.budget_exhausted);
  CHECK_FALSE(t.converged);
  CHECK(t.iterations.size() == 6);
  auto g = config_for(Strategy::GG, 1e-14);
  g.max_solves = 10;
  const auto u = run_adaptive(p, disc, g);
  CHECK(u.budget_exhausted);
  CHECK(u.iterations.back().solves >= 10);
  CHECK(u.iterations[u.iterations.size() - 2].solves < 10);
}

TEST_CASE("traces do not depend on parallelism") {
  const auto p = default_problem(3);
  const SpatialDiscretization disc(p, 128);
  for (Strategy s : kAll) {
    auto c = config_for(s, 1e-6);
    const auto a = run_adaptive(p, disc, c);
    c.parallelism = 8;
    const auto b = run_adaptive(p, disc, c);
    const auto again = run_adaptive(p, disc, c);
    CHECK(same_trace(a, b));
    CHECK(same_trace(b, again));
  }
}

TEST_CASE("iteration callback sees every record") {
  const auto p = default_problem(1);
  const SpatialDiscretization disc(p, 32);
  auto c = config_for(Strategy::GNEnvelope);
  int calls = 0;
  c.on_iteration = [&](const IterationRecord& r) { CHECK(r.n == calls++); };
  const auto t = run_adaptive(p, disc, c);
  CHECK(calls == static_cast<int>(t.iterations.size()));
}
