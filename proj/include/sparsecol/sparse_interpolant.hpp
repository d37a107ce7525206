#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sparsecol/multi_index.hpp"
#include "sparsecol/nodes.hpp"

namespace sparsecol {

/// f(node_index, y) -> value vector. Must be pure: it may be called
/// concurrently for distinct points.
using PointEvaluator = std::function<Eigen::VectorXd(const MultiIndex& node_index, std::span<const double> y)>;

/// Univariate hierarchical Lagrange polynomials h_i, i.e. the Lagrange basis
/// function of y_(i) on the first level set containing it.
class HierarchicalBasis {
public:
  explicit HierarchicalBasis(std::shared_ptr<const NodeFamily> family) : family_(std::move(family)) {}

  double eval(int i, double y) const;
  /// h_0(y), ..., h_last(y)
  std::vector<double> eval_all(int last, double y) const;

private:
  void ensure(int last) const;

  std::shared_ptr<const NodeFamily> family_;
  mutable std::vector<double> nodes_;
  mutable std::vector<double> denominators_;
  mutable std::vector<int> support_;  // number of nodes in the level set of i
};

/// W(i) = prod_m (m(i_m) - m(i_m - 1)).
long work(NodeKind kind, const MultiIndex& i);

/// Node indices of Y_i^+ (new points of index i), lexicographic.
std::vector<MultiIndex> new_points(NodeKind kind, const MultiIndex& i);

/// Node indices of the full tensor grid Y_i, lexicographic.
std::vector<MultiIndex> tensor_points(NodeKind kind, const MultiIndex& i);

/// Node indices of Y_Lambda.
IndexSet grid_points(NodeKind kind, const MonotoneIndexSet& set);

std::vector<double> coordinates(const NodeFamily& family, const MultiIndex& node_index);

/// S_Lambda f stored as hierarchical surpluses attached to grid points.
class SparseInterpolant {
public:
  struct AddReport {
    MultiIndex index;
    std::vector<MultiIndex> new_points;
  };

  SparseInterpolant(std::shared_ptr<const NodeFamily> family, std::size_t dim, std::size_t value_size);

  const MonotoneIndexSet& index_set() const { return set_; }
  const NodeFamily& family() const { return *family_; }
  std::shared_ptr<const NodeFamily> family_ptr() const { return family_; }
  NodeKind kind() const { return family_->kind(); }
  std::size_t dim() const { return set_.dim(); }
  std::size_t value_size() const { return value_size_; }
  std::size_t num_points() const { return grid_.size(); }
  bool empty() const { return grid_.empty(); }

  /// Adds an index from the reduced margin (or 0 to an empty interpolant).
  /// Surpluses are f - S_Lambda f at the new points, taken before insertion.
  /// Function values may be computed on `threads` workers.
  AddReport add_index(const MultiIndex& i, const PointEvaluator& f, unsigned threads = 1);

  Eigen::VectorXd evaluate(std::span<const double> y) const;
  /// One row per point.
  Eigen::MatrixXd evaluate_many(const std::vector<std::vector<double>>& ys) const;

  /// Grid point node indices mapped to their surplus row.
  const std::map<MultiIndex, std::size_t>& grid() const { return grid_; }
  Eigen::Map<const Eigen::VectorXd> surplus(std::size_t row) const;
  Eigen::Map<const Eigen::VectorXd> surplus(const MultiIndex& node_index) const;

  /// Hierarchical part contributed by index i, evaluated at y:
  /// sum over Y_i^+ of surplus * h_j(y). Requires i in the set.
  Eigen::VectorXd evaluate_detail(const MultiIndex& i, std::span<const double> y) const;

  nlohmann::json to_json() const;
  static SparseInterpolant from_json(const nlohmann::json& j);

private:
  void check_point(std::span<const double> y) const;
  std::vector<std::vector<double>> basis_tables(std::span<const double> y) const;

  std::shared_ptr<const NodeFamily> family_;
  MonotoneIndexSet set_;
  std::size_t value_size_;
  HierarchicalBasis basis_;
  std::map<MultiIndex, std::size_t> grid_;
  std::vector<MultiIndex> rows_;
  std::vector<double> surpluses_;  // row-major, rows_.size() x value_size_
  std::vector<int> max_node_;      // per dimension
};

} // namespace sparsecol
