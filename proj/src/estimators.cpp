#include "sparsecol/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "sparsecol/error.hpp"
#include "sparsecol/parallel.hpp"
#include "sparsecol/quadrature.hpp"

namespace sparsecol {

namespace {

// Products of per-dimension weights in lexicographic (last axis fastest) order.
std::vector<double> tensor_weights(const std::vector<Rule1d>& rules) {
  std::vector<double> w{1.0};
  for (const auto& r : rules) {
    std::vector<double> next;
    next.reserve(w.size() * r.weights.size());
    for (double a : w)
      for (double b : r.weights) next.push_back(a * b);
    w = std::move(next);
  }
  return w;
}

std::vector<std::vector<double>> tensor_points_of(const std::vector<Rule1d>& rules) {
  std::vector<std::vector<double>> pts{{}};
  for (const auto& r : rules) {
    std::vector<std::vector<double>> next;
    next.reserve(pts.size() * r.points.size());
    for (const auto& p : pts)
      for (double x : r.points) {
        auto q = p;
        q.push_back(x);
        next.push_back(std::move(q));
      }
    pts = std::move(next);
  }
  return pts;
}

double combine(const Eigen::VectorXd& row_norms, const std::vector<double>& weights, double p) {
  if (p == std::numeric_limits<double>::infinity()) return row_norms.size() ? row_norms.maxCoeff() : 0.0;
  double s = 0.0;
  for (Eigen::Index q = 0; q < row_norms.size(); ++q) s += weights[static_cast<std::size_t>(q)] * std::pow(row_norms(q), p);
  return std::pow(s, 1.0 / p);
}

// Rows of G^T compressed to an equivalent set of rows with the same Gram
// matrix: ||G^T c|| = ||R c|| for the R factor of G.
RowMatrix compress_columns(const Eigen::MatrixXd& g) {
  if (g.cols() >= g.rows()) return g.transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(g.cols()).triangularView<Eigen::Upper>();
  return r.transpose();
}

} // namespace

std::vector<std::vector<double>> sup_sample_grid(std::size_t dim, const NormSpec& norm) {
  auto n = static_cast<std::size_t>(std::max(norm.sup_points, 2));
  while (n > 2 && std::pow(static_cast<double>(n), static_cast<double>(dim)) > static_cast<double>(norm.sup_cap)) --n;
  return std::vector<std::vector<double>>(dim, equispaced(n));
}

double parametric_norm(const ParametricField& field, const NormSpec& norm) {
  const std::size_t dim = field.degree.size();
  if (norm.is_sup()) {
    const RowMatrix v = field.values_on(sup_sample_grid(dim, norm));
    return v.rows() ? v.rowwise().norm().maxCoeff() : 0.0;
  }
  std::vector<Rule1d> rules;
  for (int d : field.degree) {
    int order = d + 1;
    if (norm.p != 2.0) order = std::max(order, norm.quad_order);
    rules.push_back(gauss_legendre(static_cast<std::size_t>(order)));
  }
  std::vector<std::vector<double>> axes;
  for (const auto& r : rules) axes.push_back(r.points);
  const RowMatrix v = field.values_on(axes);
  return combine(v.rowwise().norm(), tensor_weights(rules), norm.p);
}

ResidualEstimator::ResidualEstimator(const SparseInterpolant& un, const SpatialDiscretization& disc, NormSpec norm,
                                     unsigned threads)
    : un_(&un), disc_(&disc), norm_(norm), threads_(threads) {
  if (un.empty()) throw InvalidSet("estimator needs a nonempty interpolant");
  if (un.value_size() != disc.dofs()) throw DimensionMismatch("interpolant does not match the mesh");
}

void ResidualEstimator::prepare(const std::vector<MultiIndex>& ks) {
  IndexSet needed;
  for (const auto& k : ks)
    for (auto& j : tensor_points(un_->kind(), k))
      if (!flux_.count(j)) needed.insert(std::move(j));
  if (needed.empty()) return;

  const std::vector<MultiIndex> nodes(needed.begin(), needed.end());
  std::vector<std::vector<double>> ys(nodes.size());
  for (std::size_t p = 0; p < nodes.size(); ++p) ys[p] = coordinates(un_->family(), nodes[p]);

  // evaluate u_n in chunks; chunk boundaries do not affect the values
  constexpr std::size_t kChunk = 64;
  const std::size_t chunks = (nodes.size() + kChunk - 1) / kChunk;
  std::vector<Eigen::VectorXd> flux(nodes.size());
  parallel_for(chunks, threads_, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(nodes.size(), lo + kChunk);
    const std::vector<std::vector<double>> sub(ys.begin() + static_cast<std::ptrdiff_t>(lo),
                                               ys.begin() + static_cast<std::ptrdiff_t>(hi));
    const Eigen::MatrixXd u = un_->evaluate_many(sub);
    for (std::size_t p = lo; p < hi; ++p)
      flux[p] = disc_->element_l2_coordinates(
          disc_->flux(u.row(static_cast<Eigen::Index>(p - lo)).transpose(), ys[p]));
  });
  for (std::size_t p = 0; p < nodes.size(); ++p) flux_.emplace(nodes[p], std::move(flux[p]));
}

CombinationDetail ResidualEstimator::detail_unchecked(const MultiIndex& k) const {
  const auto pts = tensor_points(un_->kind(), k);
  Eigen::MatrixXd g(static_cast<Eigen::Index>(disc_->elements()), static_cast<Eigen::Index>(pts.size()));
  for (std::size_t p = 0; p < pts.size(); ++p) g.col(static_cast<Eigen::Index>(p)) = flux_.at(pts[p]);
  return {un_->family_ptr(), k, compress_columns(g)};
}

double ResidualEstimator::eta_unchecked(const MultiIndex& k) const {
  const CombinationDetail d = detail_unchecked(k);
  ParametricField field;
  for (std::size_t m = 0; m < k.dim(); ++m) field.degree.push_back(un_->family().growth(k[m]));
  field.values_on = [&d](const std::vector<std::vector<double>>& pts) { return d.evaluate_tensor(pts); };
  return parametric_norm(field, norm_);
}

double ResidualEstimator::eta(const MultiIndex& k) {
  if (!un_->index_set().in_margin(k)) throw NotInMargin("index " + k.str() + " is not in the margin");
  prepare({k});
  return eta_unchecked(k);
}

std::vector<double> ResidualEstimator::eta_all(const std::vector<MultiIndex>& ks) {
  prepare(ks);
  std::vector<double> out(ks.size());
  parallel_for(ks.size(), threads_, [&](std::size_t i) { out[i] = eta_unchecked(ks[i]); });
  return out;
}

CombinationDetail ResidualEstimator::detail(const MultiIndex& k) {
  prepare({k});
  return detail_unchecked(k);
}

double residual_estimator(const SparseInterpolant& un, const SpatialDiscretization& disc, const MultiIndex& k,
                          const NormSpec& norm) {
  ResidualEstimator est(un, disc, norm);
  return est.eta(k);
}

double surplus_indicator(const SparseInterpolant& u_n, const SpatialDiscretization& disc, SolveCache& cache,
                         const MultiIndex& k, const NormSpec& norm, unsigned threads) {
  if (!u_n.index_set().in_reduced_margin(k))
    throw MonotonicityViolation("surplus indicator needs " + k.str() + " in the reduced margin");
  const auto pts = new_points(u_n.kind(), k);
  std::vector<std::vector<double>> ys(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) ys[p] = coordinates(u_n.family(), pts[p]);
  std::vector<Eigen::VectorXd> solved(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t p) { solved[p] = cache.get(pts[p], ys[p]); });
  const Eigen::MatrixXd current = u_n.evaluate_many(ys);

  RowMatrix surplus(static_cast<Eigen::Index>(pts.size()), static_cast<Eigen::Index>(disc.elements()));
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const Eigen::VectorXd s = solved[p] - current.row(static_cast<Eigen::Index>(p)).transpose();
    surplus.row(static_cast<Eigen::Index>(p)) = disc.h1_coordinates(s).transpose();
  }

  const HierarchicalBasis basis(u_n.family_ptr());
  std::vector<int> lo(k.dim()), extents(k.dim());
  ParametricField field;
  for (std::size_t m = 0; m < k.dim(); ++m) {
    lo[m] = u_n.family().growth(k[m] - 1) + 1;
    extents[m] = level_increment(u_n.kind(), k[m]);
    field.degree.push_back(u_n.family().growth(k[m]));
  }
  field.values_on = [&](const std::vector<std::vector<double>>& axes) {
    std::vector<RowMatrix> ops;
    for (std::size_t m = 0; m < axes.size(); ++m) {
      RowMatrix op(static_cast<Eigen::Index>(axes[m].size()), extents[m]);
      for (std::size_t q = 0; q < axes[m].size(); ++q)
        for (int j = 0; j < extents[m]; ++j) op(static_cast<Eigen::Index>(q), j) = basis.eval(lo[m] + j, axes[m][q]);
      ops.push_back(std::move(op));
    }
    return mode_products(surplus, extents, ops);
  };
  return parametric_norm(field, norm);
}

double profit(NodeKind kind, const IndexSet& envelope, const std::map<MultiIndex, double>& eta) {
  double num = 0.0;
  double den = 0.0;
  for (const auto& i : envelope) {
    num += eta.at(i);
    den += static_cast<double>(work(kind, i));
  }
  return num / den;
}

ReferenceSolution::ReferenceSolution(const SpatialDiscretization& disc, int order, unsigned threads) : disc_(&disc) {
  const std::size_t dim = disc.dim();
  if (dim > 4)
    throw DimensionMismatch("tensor reference quadrature is infeasible for M = " + std::to_string(dim) +
                            "; use a sampling-based error estimate instead");
  const std::vector<Rule1d> rules(dim, gauss_legendre(static_cast<std::size_t>(order)));
  points_ = tensor_points_of(rules);
  weights_ = tensor_weights(rules);
  solutions_.resize(static_cast<Eigen::Index>(points_.size()), static_cast<Eigen::Index>(disc.dofs()));
  parallel_for(points_.size(), threads, [&](std::size_t p) {
    solutions_.row(static_cast<Eigen::Index>(p)) = solve_at(disc, points_[p]).transpose();
  });
}

double ReferenceSolution::error(const SparseInterpolant& interpolant, const NormSpec& norm) const {
  const Eigen::MatrixXd approx = interpolant.evaluate_many(points_);
  Eigen::VectorXd norms(static_cast<Eigen::Index>(points_.size()));
  for (Eigen::Index p = 0; p < norms.size(); ++p) {
    const Eigen::VectorXd diff = solutions_.row(p).transpose() - approx.row(p).transpose();
    norms(p) = disc_->h1_coordinates(diff).norm();
  }
  return combine(norms, weights_, norm.p);
}

double reference_error(const SparseInterpolant& interpolant, const SpatialDiscretization& disc,
                       const NormSpec& norm, int order) {
  return ReferenceSolution(disc, order).error(interpolant, norm);
}

} // namespace sparsecol
