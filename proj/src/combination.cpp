#include "sparsecol/combination.hpp"

#include <cmath>

#include "sparsecol/error.hpp"
#include "sparsecol/parallel.hpp"

namespace sparsecol {

RowMatrix lagrange_matrix(const NodeFamily& family, int level, std::span<const double> points) {
  const std::vector<double> nodes = family.level_nodes(level);
  RowMatrix a(static_cast<Eigen::Index>(points.size()), static_cast<Eigen::Index>(nodes.size()));
  for (std::size_t q = 0; q < points.size(); ++q) {
    const auto l = lagrange_basis(nodes, points[q]);
    for (std::size_t i = 0; i < l.size(); ++i) a(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i)) = l[i];
  }
  return a;
}

RowMatrix detail_matrix(const NodeFamily& family, int level, std::span<const double> points) {
  RowMatrix d = lagrange_matrix(family, level, points);
  if (level > 0) {
    const RowMatrix coarse = lagrange_matrix(family, level - 1, points);
    d.leftCols(coarse.cols()) -= coarse;
  }
  return d;
}

RowMatrix mode_products(const RowMatrix& values, const std::vector<int>& extents, const std::vector<RowMatrix>& ops) {
  const Eigen::Index r = values.cols();
  std::vector<Eigen::Index> shape(extents.begin(), extents.end());
  RowMatrix cur = values;
  for (std::size_t m = 0; m < shape.size(); ++m) {
    const RowMatrix& op = ops[m];
    if (op.cols() != shape[m]) throw DimensionMismatch("mode product operator has wrong width");
    Eigen::Index before = 1, after = 1;
    for (std::size_t a = 0; a < m; ++a) before *= shape[a];
    for (std::size_t a = m + 1; a < shape.size(); ++a) after *= shape[a];
    const Eigen::Index n = shape[m], q = op.rows();
    RowMatrix next(before * q * after, r);
    for (Eigen::Index b = 0; b < before; ++b) {
      Eigen::Map<const RowMatrix> in(cur.data() + b * n * after * r, n, after * r);
      Eigen::Map<RowMatrix> out(next.data() + b * q * after * r, q, after * r);
      out.noalias() = op * in;
    }
    shape[m] = q;
    cur = std::move(next);
  }
  return cur;
}

TensorInterpolant::TensorInterpolant(std::shared_ptr<const NodeFamily> family, MultiIndex levels, RowMatrix values)
    : family_(std::move(family)), levels_(std::move(levels)), values_(std::move(values)) {
  Eigen::Index expected = 1;
  for (std::size_t m = 0; m < levels_.dim(); ++m) expected *= family_->growth(levels_[m]) + 1;
  if (values_.rows() != expected) throw DimensionMismatch("tensor values do not match the grid size");
}

TensorInterpolant TensorInterpolant::build(std::shared_ptr<const NodeFamily> family, const MultiIndex& levels,
                                           const PointEvaluator& g) {
  const auto pts = tensor_points(family->kind(), levels);
  RowMatrix values;
  for (std::size_t p = 0; p < pts.size(); ++p) {
    const auto y = coordinates(*family, pts[p]);
    const Eigen::VectorXd v = g(pts[p], y);
    if (p == 0) values.resize(static_cast<Eigen::Index>(pts.size()), v.size());
    values.row(static_cast<Eigen::Index>(p)) = v.transpose();
  }
  return {std::move(family), levels, std::move(values)};
}

Eigen::VectorXd TensorInterpolant::evaluate(std::span<const double> y) const {
  std::vector<RowMatrix> ops;
  std::vector<int> extents;
  for (std::size_t m = 0; m < levels_.dim(); ++m) {
    ops.push_back(lagrange_matrix(*family_, levels_[m], y.subspan(m, 1)));
    extents.push_back(family_->growth(levels_[m]) + 1);
  }
  return mode_products(values_, extents, ops).row(0).transpose();
}

CombinationDetail::CombinationDetail(std::shared_ptr<const NodeFamily> family, MultiIndex k, RowMatrix grid_values)
    : family_(std::move(family)), k_(std::move(k)), values_(std::move(grid_values)) {}

CombinationDetail CombinationDetail::build(std::shared_ptr<const NodeFamily> family, const MultiIndex& k,
                                           const PointEvaluator& g, unsigned threads) {
  const auto pts = tensor_points(family->kind(), k);
  std::vector<Eigen::VectorXd> vals(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t p) { vals[p] = g(pts[p], coordinates(*family, pts[p])); });
  RowMatrix values(static_cast<Eigen::Index>(pts.size()), pts.empty() ? 0 : vals[0].size());
  for (std::size_t p = 0; p < pts.size(); ++p) values.row(static_cast<Eigen::Index>(p)) = vals[p].transpose();
  return {std::move(family), k, std::move(values)};
}

std::vector<int> CombinationDetail::extents() const {
  std::vector<int> e(k_.dim());
  for (std::size_t m = 0; m < e.size(); ++m) e[m] = family_->growth(k_[m]) + 1;
  return e;
}

std::vector<std::pair<int, TensorInterpolant>> CombinationDetail::terms() const {
  const std::size_t dim = k_.dim();
  const std::vector<int> full = extents();
  const auto full_pts = tensor_points(family_->kind(), k_);
  std::vector<std::pair<int, TensorInterpolant>> out;
  for (unsigned mask = 0; mask < (1u << dim); ++mask) {
    MultiIndex level = k_;
    int sign = 1;
    bool valid = true;
    for (std::size_t m = 0; m < dim; ++m) {
      if (mask & (1u << m)) {
        level[m] -= 1;
        sign = -sign;
      }
      if (level[m] < 0) valid = false;
    }
    if (!valid) continue;
    // Y_{k-j} is the sub-box of Y_k with node indices <= m(k_m - j_m).
    const auto sub_pts = tensor_points(family_->kind(), level);
    RowMatrix sub(static_cast<Eigen::Index>(sub_pts.size()), values_.cols());
    for (std::size_t p = 0; p < sub_pts.size(); ++p) {
      Eigen::Index row = 0;
      for (std::size_t m = 0; m < dim; ++m) row = row * full[m] + sub_pts[p][m];
      sub.row(static_cast<Eigen::Index>(p)) = values_.row(row);
    }
    out.emplace_back(sign, TensorInterpolant(family_, level, std::move(sub)));
  }
  return out;
}

Eigen::VectorXd CombinationDetail::evaluate(std::span<const double> y) const {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(values_.cols());
  for (const auto& [sign, interp] : terms()) out += sign * interp.evaluate(y);
  return out;
}

RowMatrix CombinationDetail::evaluate_tensor(const std::vector<std::vector<double>>& points) const {
  std::vector<RowMatrix> ops;
  for (std::size_t m = 0; m < k_.dim(); ++m) ops.push_back(detail_matrix(*family_, k_[m], points[m]));
  return mode_products(values_, extents(), ops);
}

} // namespace sparsecol
