#include <doctest.h>

#include <cmath>
#include <random>

#include "sparsecol/combination.hpp"
#include "sparsecol/error.hpp"
#include "sparsecol/estimators.hpp"
#include "sparsecol/quadrature.hpp"

using namespace sparsecol;
using doctest::Approx;

namespace {

struct Fixture {
  DiffusionProblem problem;
  SpatialDiscretization disc;
  SolveCache cache;
  SparseInterpolant un;

  Fixture(DiffusionProblem p, std::size_t n, NodeKind kind = NodeKind::Leja)
      : problem(std::move(p)), disc(problem, n), cache(disc), un(NodeFamily::get(kind), problem.dim(), disc.dofs()) {}

  PointEvaluator solver() {
    return [this](const MultiIndex& j, std::span<const double> y) { return cache.get(j, y); };
  }
  void add(const MultiIndex& i) { un.add_index(i, solver()); }
  void add_all(const IndexSet& s) {
    std::vector<MultiIndex> order(s.begin(), s.end());
    std::sort(order.begin(), order.end(), admissible_order);
    for (const auto& i : order) add(i);
  }
};

DiffusionProblem default_problem(std::size_t dim) { return DiffusionProblem::from_json({{"M", dim}}); }

// Tensor Gauss-Legendre L^2_mu norm of a vector-valued function of y.
double gl_norm(const std::function<Eigen::VectorXd(const std::vector<double>&)>& g, std::size_t dim, std::size_t order) {
  const Rule1d r = gauss_legendre(order);
  std::vector<std::size_t> idx(dim, 0);
  double s = 0.0;
  while (true) {
    std::vector<double> y(dim);
    double w = 1.0;
    for (std::size_t m = 0; m < dim; ++m) {
      y[m] = r.points[idx[m]];
      w *= r.weights[idx[m]];
    }
    s += w * g(y).squaredNorm();
    std::size_t m = dim;
    while (m-- > 0) {
      if (++idx[m] < order) break;
      idx[m] = 0;
    }
    if (m == static_cast<std::size_t>(-1)) break;
  }
  return std::sqrt(s);
}

} // namespace

TEST_CASE("parametric norm examples") {
  ParametricField zero{{3}, [](const std::vector<std::vector<double>>& pts) {
                         return RowMatrix(RowMatrix::Zero(static_cast<Eigen::Index>(pts[0].size()), 4));
                       }};
  CHECK(parametric_norm(zero, NormSpec::l2()) == 0.0);
  CHECK(parametric_norm(zero, NormSpec::sup()) == 0.0);

  ParametricField constant{{0, 0}, [](const std::vector<std::vector<double>>& pts) {
                             RowMatrix v(static_cast<Eigen::Index>(pts[0].size() * pts[1].size()), 2);
                             v.rowwise() = Eigen::RowVector2d(3.0, 4.0);
                             return v;
                           }};
  CHECK(parametric_norm(constant, NormSpec::l2()) == Approx(5.0).epsilon(1e-14));

  ParametricField linear{{1}, [](const std::vector<std::vector<double>>& pts) {
                           RowMatrix v(static_cast<Eigen::Index>(pts[0].size()), 1);
                           for (std::size_t q = 0; q < pts[0].size(); ++q) v(static_cast<Eigen::Index>(q), 0) = pts[0][q];
                           return v;
                         }};
  CHECK(parametric_norm(linear, NormSpec::l2()) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(parametric_norm(linear, NormSpec::sup()) == Approx(1.0));
  NormSpec p4;
  p4.p = 4.0;
  // (E y^4)^(1/4) = 5^(-1/4)
  CHECK(parametric_norm(linear, p4) == Approx(std::pow(5.0, -0.25)).epsilon(1e-12));
}

TEST_CASE("p = 2 norms are quadrature exact") {
  Fixture f(default_problem(2), 64);
  f.add_all({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}});
  ResidualEstimator est(f.un, f.disc, NormSpec::l2());
  for (const auto& k : f.un.index_set().margin()) {
    const CombinationDetail d = est.detail(k);
    ParametricField field;
    for (std::size_t m = 0; m < 2; ++m) field.degree.push_back(f.un.family().growth(k[m]));
    field.values_on = [&d](const std::vector<std::vector<double>>& pts) { return d.evaluate_tensor(pts); };
    const double base = parametric_norm(field, NormSpec::l2());
    for (auto& deg : field.degree) deg = 2 * deg + 1;
    const double doubled = parametric_norm(field, NormSpec::l2());
    CHECK(std::abs(base - doubled) <= 1e-12 * base);
    CHECK(base == Approx(est.eta(k)).epsilon(1e-14));
  }
}

TEST_CASE("sup sample grid respects the cap") {
  NormSpec s = NormSpec::sup();
  CHECK(sup_sample_grid(1, s)[0].size() == 33);
  CHECK(sup_sample_grid(3, s)[0].size() == 33);
  const auto g4 = sup_sample_grid(4, s);
  CHECK(std::pow(static_cast<double>(g4[0].size()), 4.0) <= 40000.0);
}

TEST_CASE("residual estimator annihilation cases") {
  // a = 2 + y, Lambda = {0}: a grad u_n has y-degree 1
  Fixture f(DiffusionProblem::constant(2.0, {1.0}, 1.0), 32);
  f.add({0});
  ResidualEstimator est(f.un, f.disc, NormSpec::l2());
  CHECK(est.eta({1}) > 1e-3);
  const auto etas = est.eta_all({{2}, {3}, {4}});
  for (double e : etas) CHECK(e <= 1e-12);
  CHECK_THROWS_AS(est.eta({2}), NotInMargin);
  CHECK_THROWS_AS(residual_estimator(f.un, f.disc, {0}, NormSpec::l2()), NotInMargin);

  // deterministic coefficient: everything beyond the root vanishes
  Fixture d(DiffusionProblem::constant(1.5, {0.0, 0.0}, 1.0), 32);
  d.add_all({{0, 0}, {1, 0}, {0, 1}});
  for (const auto& k : d.un.index_set().margin()) {
    CHECK(residual_estimator(d.un, d.disc, k, NormSpec::l2()) <= 1e-12);
    CHECK(residual_estimator(d.un, d.disc, k, NormSpec::sup()) <= 1e-12);
  }
}

TEST_CASE("residual estimator is positive and reliable on the default problem") {
  Fixture f(default_problem(2), 128);
  const ReferenceSolution ref(f.disc, 16);
  const double a_min = check_ellipticity(f.problem, f.disc).a_min;
  f.add({0, 0});
  for (int step = 0; step < 6; ++step) {
    ResidualEstimator est(f.un, f.disc, NormSpec::l2());
    const auto& marg = f.un.index_set().margin();
    const std::vector<MultiIndex> cand(marg.begin(), marg.end());
    const auto eta = est.eta_all(cand);
    double total = 0.0;
    for (double e : eta) {
      if (step == 0) CHECK(e > 0.0);
      total += e;
    }
    CHECK(ref.error(f.un, NormSpec::l2()) <= total / a_min);
    f.add(*f.un.index_set().reduced_margin().begin());
  }
}

TEST_CASE("estimator detail matches a hierarchical build of the flux") {
  Fixture f(default_problem(2), 32);
  f.add_all({{0, 0}, {1, 0}, {0, 1}, {2, 0}});
  const auto& un = f.un;
  PointEvaluator flux = [&](const MultiIndex&, std::span<const double> y) {
    return f.disc.element_l2_coordinates(f.disc.flux(un.evaluate(y), y));
  };
  ResidualEstimator est(un, f.disc, NormSpec::l2());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (const auto& k : un.index_set().margin()) {
    IndexSet box;
    for (int a = 0; a <= k[0]; ++a)
      for (int b = 0; b <= k[1]; ++b) box.insert(MultiIndex{a, b});
    SparseInterpolant h(un.family_ptr(), 2, f.disc.elements());
    std::vector<MultiIndex> order(box.begin(), box.end());
    std::sort(order.begin(), order.end(), admissible_order);
    for (const auto& i : order) h.add_index(i, flux);
    const CombinationDetail d = est.detail(k);
    for (int s = 0; s < 50; ++s) {
      const std::vector<double> y{u(rng), u(rng)};
      const double a = d.evaluate(y).norm();
      const double b = h.evaluate_detail(k, y).norm();
      CHECK(std::abs(a - b) <= 1e-10 * std::max(1e-6, b));
    }
    // and the estimator agrees with a high-order quadrature of the uncompressed detail
    const auto raw = CombinationDetail::build(un.family_ptr(), k, flux);
    const double oracle = gl_norm([&](const std::vector<double>& y) { return raw.evaluate(y); }, 2, 12);
    CHECK(est.eta(k) == Approx(oracle).epsilon(1e-10));
  }
}

TEST_CASE("surplus indicator") {
  Fixture zero(DiffusionProblem::constant(2.0, {1.0}, 0.0), 32);
  zero.add({0});
  CHECK(surplus_indicator(zero.un, zero.disc, zero.cache, {1}, NormSpec::l2()) == 0.0);

  Fixture det(DiffusionProblem::constant(2.0, {0.0, 0.0}, 1.0), 32);
  det.add({0, 0});
  for (const MultiIndex& k : {MultiIndex{1, 0}, MultiIndex{0, 1}})
    CHECK(surplus_indicator(det.un, det.disc, det.cache, k, NormSpec::l2()) <= 1e-15);

  Fixture f(DiffusionProblem::constant(2.0, {1.0}, 1.0), 64);
  f.add({0});
  std::vector<double> values;
  for (int k = 1; k <= 7; ++k) {
    const std::size_t before = f.cache.size();
    values.push_back(surplus_indicator(f.un, f.disc, f.cache, {k}, NormSpec::l2()));
    CHECK(f.cache.size() == before + 1);
    f.add({k});
    CHECK(f.cache.size() == before + 1);  // add_index reused the cached solve
  }
  CHECK(values[0] > 0.0);
  for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] / values[i - 1] < 1.0);
  CHECK_THROWS_AS(surplus_indicator(f.un, f.disc, f.cache, {9}, NormSpec::l2()), MonotonicityViolation);
}

TEST_CASE("surplus indicator equals the norm of the hierarchical detail") {
  Fixture f(default_problem(2), 32);
  f.add_all({{0, 0}, {1, 0}, {0, 1}});
  const MultiIndex k{1, 1};
  const double ind = surplus_indicator(f.un, f.disc, f.cache, k, NormSpec::l2());
  f.add(k);
  const double oracle = gl_norm(
      [&](const std::vector<double>& y) { return Eigen::VectorXd(f.disc.h1_coordinates(f.un.evaluate_detail(k, y))); },
      2, 8);
  CHECK(ind == Approx(oracle).epsilon(1e-12));
}

TEST_CASE("profit") {
  Fixture f(default_problem(2), 32);
  f.add_all({{0, 0}, {1, 0}});
  ResidualEstimator est(f.un, f.disc, NormSpec::l2());
  std::map<MultiIndex, double> eta;
  for (const auto& k : f.un.index_set().margin()) eta[k] = est.eta(k);
  const MultiIndex r{2, 0};
  CHECK(profit(NodeKind::Leja, monotone_envelope(f.un.index_set(), r), eta) == eta.at(r));
  const MultiIndex g{1, 1};
  CHECK(profit(NodeKind::Leja, monotone_envelope(f.un.index_set(), g), eta) ==
        Approx(0.5 * (eta.at({0, 1}) + eta.at({1, 1}))));
  const std::map<MultiIndex, double> cc{{{2}, 0.8}};
  CHECK(profit(NodeKind::ClenshawCurtis, {{2}}, cc) == Approx(0.4));
}

TEST_CASE("reference error") {
  Fixture det(DiffusionProblem::constant(2.0, {0.0}, 1.0), 64);
  det.add({0});
  CHECK(reference_error(det.un, det.disc, NormSpec::l2(), 10) <= 1e-10);

  // Lambda = {0} interpolates at y = -1; u(y) = x(1-x)/(2(2+y)) at the nodes
  Fixture f(DiffusionProblem::constant(2.0, {1.0}, 1.0), 64);
  f.add({0});
  const double s = spatial_norm(f.disc, f.disc.interpolate([](double x) { return x * (1.0 - x); }), SpatialNorm::H1Seminorm);
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double acc = 0.0;
  constexpr int kSamples = 10000;
  for (int i = 0; i < kSamples; ++i) {
    const double c = 1.0 / (2.0 * (2.0 + u(rng))) - 0.5;
    acc += c * c;
  }
  const double mc = std::sqrt(acc / kSamples) * s;
  CHECK(reference_error(f.un, f.disc, NormSpec::l2(), 20) == Approx(mc).epsilon(0.01));

  NormSpec sup = NormSpec::sup();
  // sup over the Gauss points approaches |1/(2(2+y)) - 1/2| at y = 1
  CHECK(reference_error(f.un, f.disc, sup, 40) == Approx((0.5 - 1.0 / 6.0) * s).epsilon(0.01));

  const auto big = DiffusionProblem::from_json({{"M", 5}});
  const SpatialDiscretization disc5(big, 16);
  CHECK_THROWS_AS(ReferenceSolution(disc5, 4), DimensionMismatch);
}
