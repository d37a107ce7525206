#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sparsecol/multi_index.hpp"
#include "sparsecol/nodes.hpp"
#include "sparsecol/sparse_interpolant.hpp"

namespace sparsecol {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Rows: evaluation points; columns: i <= m(level). Lagrange basis of Y_level.
RowMatrix lagrange_matrix(const NodeFamily& family, int level, std::span<const double> points);

/// Rows: evaluation points; columns: i <= m(level). Weights of Delta_level.
RowMatrix detail_matrix(const NodeFamily& family, int level, std::span<const double> points);

/// Applies ops[m] (Q_m x n_m) along every tensor axis of `values`, whose rows
/// enumerate a tensor grid with extents n_m in lexicographic order (last
/// axis fastest). Returns the values on the Q_1 x ... x Q_M grid.
RowMatrix mode_products(const RowMatrix& values, const std::vector<int>& extents, const std::vector<RowMatrix>& ops);

/// Full tensor Lagrange interpolant (I_{l_1} x ... x I_{l_M}) g from values on Y_l.
class TensorInterpolant {
public:
  TensorInterpolant(std::shared_ptr<const NodeFamily> family, MultiIndex levels, RowMatrix values);

  static TensorInterpolant build(std::shared_ptr<const NodeFamily> family, const MultiIndex& levels,
                                 const PointEvaluator& g);

  Eigen::VectorXd evaluate(std::span<const double> y) const;
  const MultiIndex& levels() const { return levels_; }

private:
  std::shared_ptr<const NodeFamily> family_;
  MultiIndex levels_;
  RowMatrix values_;
};

/// Delta_k g via the combination technique: the signed sum over j in {0,1}^M
/// of tensor interpolants I_{k-j} g, with I_{-1} := 0. Holds the values of g
/// on the tensor grid Y_k, which contains every Y_{k-j}.
class CombinationDetail {
public:
  CombinationDetail(std::shared_ptr<const NodeFamily> family, MultiIndex k, RowMatrix grid_values);

  static CombinationDetail build(std::shared_ptr<const NodeFamily> family, const MultiIndex& k,
                                 const PointEvaluator& g, unsigned threads = 1);

  const MultiIndex& index() const { return k_; }
  /// Rows follow tensor_points(kind, k).
  const RowMatrix& grid_values() const { return values_; }
  std::vector<int> extents() const;

  /// Literal signed sum of tensor interpolants.
  Eigen::VectorXd evaluate(std::span<const double> y) const;

  /// Signed combination as (+1 or -1, I_{k-j}) terms; terms with a negative
  /// level are omitted.
  std::vector<std::pair<int, TensorInterpolant>> terms() const;

  /// Values on the tensor grid points[0] x ... x points[M-1]. Uses the
  /// factorized form prod_m (I_{k_m} - I_{k_m - 1}), which is the same
  /// signed sum expanded along each axis.
  RowMatrix evaluate_tensor(const std::vector<std::vector<double>>& points) const;

private:
  std::shared_ptr<const NodeFamily> family_;
  MultiIndex k_;
  RowMatrix values_;
};

} // namespace sparsecol
