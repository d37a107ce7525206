#include "sparsecol/selftest.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

#include "sparsecol/adaptive.hpp"
#include "sparsecol/combination.hpp"
#include "sparsecol/diffusion.hpp"
#include "sparsecol/estimators.hpp"

namespace sparsecol {

namespace {

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

SelfTestCheck leja_prefix() {
  const std::vector<double> expected{-1.0, 1.0, 0.0, -0.57735, 0.65871};
  const auto y = leja_nodes(5);
  double dev = 0.0;
  for (std::size_t i = 0; i < 5; ++i) dev = std::max(dev, std::abs(y[i] - expected[i]));
  return {"leja_prefix", dev < 1e-4, "max deviation " + sci(dev)};
}

MonotoneIndexSet random_set(std::mt19937_64& rng, std::size_t dim, std::size_t size) {
  MonotoneIndexSet s = MonotoneIndexSet::root(dim);
  while (s.size() < size) {
    const auto& rm = s.reduced_margin();
    std::uniform_int_distribution<std::size_t> pick(0, rm.size() - 1);
    s.insert(*std::next(rm.begin(), static_cast<std::ptrdiff_t>(pick(rng))));
  }
  return s;
}

SelfTestCheck margins() {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_set(rng, 1 + static_cast<std::size_t>(trial % 3), 1 + static_cast<std::size_t>(trial % 15));
    if (!is_monotone(s.members())) return {"margins", false, "random set not monotone"};
    for (const auto& k : s.margin()) {
      IndexSet u = s.members();
      const auto env = monotone_envelope(s, k);
      u.insert(env.begin(), env.end());
      if (!is_monotone(u)) return {"margins", false, "envelope of " + k.str() + " not monotone"};
      IndexSet one = s.members();
      one.insert(k);
      if (is_monotone(one) != s.in_reduced_margin(k)) return {"margins", false, "reduced margin mismatch"};
    }
  }
  return {"margins", true, "50 random sets"};
}

SelfTestCheck interpolation() {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (NodeKind kind : {NodeKind::Leja, NodeKind::ClenshawCurtis}) {
    const auto family = NodeFamily::get(kind);
    for (int trial = 0; trial < 10; ++trial) {
      const std::size_t dim = 1 + static_cast<std::size_t>(trial % 3);
      const auto set = random_set(rng, dim, 8);
      auto f = [](const MultiIndex&, std::span<const double> y) {
        double s = 1.0;
        for (double v : y) s *= std::exp(0.3 * v) + v;
        return Eigen::VectorXd::Constant(1, s);
      };
      SparseInterpolant p(family, dim, 1);
      std::vector<MultiIndex> order(set.members().begin(), set.members().end());
      std::sort(order.begin(), order.end(), admissible_order);
      for (const auto& i : order) p.add_index(i, f);
      for (const auto& [node, row] : p.grid()) {
        const auto y = coordinates(*family, node);
        const double want = f(node, y)(0);
        worst = std::max(worst, std::abs(p.evaluate(y)(0) - want) / std::max(1.0, std::abs(want)));
      }
    }
  }
  return {"interpolatory", worst < 1e-10, "max relative error " + sci(worst)};
}

SelfTestCheck telescoping() {
  const auto family = NodeFamily::get(NodeKind::Leja);
  auto g = [](const MultiIndex&, std::span<const double> y) {
    return Eigen::VectorXd::Constant(1, std::cos(y[0] + 2.0 * y[1]));
  };
  const MultiIndex k{3, 2};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  const auto full = TensorInterpolant::build(family, k, g);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> y{u(rng), u(rng)};
    double sum = 0.0;
    for (int a = 0; a <= k[0]; ++a)
      for (int b = 0; b <= k[1]; ++b) sum += CombinationDetail::build(family, MultiIndex{a, b}, g).evaluate(y)(0);
    worst = std::max(worst, std::abs(sum - full.evaluate(y)(0)));
  }
  return {"telescoping", worst < 1e-10, "max deviation " + sci(worst)};
}

SelfTestCheck fem_closed_form() {
  const auto problem = DiffusionProblem::constant(2.0, {0.0}, 1.0);
  const SpatialDiscretization disc(problem, 64);
  const auto u = solve_at(disc, std::vector<double>{0.3});
  double worst = 0.0;
  for (std::size_t i = 0; i < disc.dofs(); ++i) {
    const double x = disc.node(i + 1);
    worst = std::max(worst, std::abs(u(static_cast<Eigen::Index>(i)) - x * (1.0 - x) / 4.0));
  }
  return {"fem_closed_form", worst < 1e-12, "max nodal error " + sci(worst)};
}

SelfTestCheck annihilation() {
  nlohmann::json j = {{"M", 2}, {"coefficient", {{"family", "cosine"}, {"gamma", 0.4}, {"sigma", 2.0}}}};
  const auto problem = DiffusionProblem::from_json(j);
  const SpatialDiscretization disc(problem, 32);
  SolveCache cache(disc);
  SparseInterpolant un(NodeFamily::get(NodeKind::Leja), 2, disc.dofs());
  auto f = [&cache](const MultiIndex& i, std::span<const double> y) { return cache.get(i, y); };
  for (const MultiIndex& i : {MultiIndex{0, 0}, MultiIndex{1, 0}, MultiIndex{0, 1}}) un.add_index(i, f);
  ResidualEstimator est(un, disc, NormSpec::l2());
  // a grad u_n has degree at most 2 in y_1 and 2 in y_2 here; (3,0) and (0,3) lie beyond it
  const double eta = std::max(est.eta_all({MultiIndex{3, 0}})[0], est.eta_all({MultiIndex{0, 3}})[0]);
  return {"estimator_annihilation", eta <= 1e-12, "eta " + sci(eta)};
}

SelfTestCheck short_run() {
  nlohmann::json j = {{"M", 2}, {"coefficient", {{"family", "cosine"}, {"gamma", 0.4}, {"sigma", 2.0}}}};
  const auto problem = DiffusionProblem::from_json(j);
  const SpatialDiscretization disc(problem, 32);
  AdaptiveConfig c;
  c.tolerance = 1e-6;
  const auto a = run_adaptive(problem, disc, c);
  c.parallelism = 4;
  const auto b = run_adaptive(problem, disc, c);
  bool same = a.iterations.size() == b.iterations.size() && a.converged;
  for (std::size_t n = 0; same && n < a.iterations.size(); ++n)
    same = a.iterations[n].index_set == b.iterations[n].index_set &&
           a.iterations[n].report.total == b.iterations[n].report.total;
  return {"adaptive_determinism", same, std::to_string(a.iterations.size()) + " iterations"};
}

} // namespace

std::vector<SelfTestCheck> run_selftest() {
  std::vector<std::function<SelfTestCheck()>> checks{leja_prefix, margins,       interpolation, telescoping,
                                                     fem_closed_form, annihilation, short_run};
  std::vector<SelfTestCheck> out;
  for (const auto& c : checks) {
    try {
      out.push_back(c());
    } catch (const std::exception& e) {
      out.push_back({"exception", false, e.what()});
    }
  }
  return out;
}

} // namespace sparsecol
