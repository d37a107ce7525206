#include "sparsecol/sparse_interpolant.hpp"

#include <algorithm>
#include <cmath>

#include "sparsecol/error.hpp"
#include "sparsecol/parallel.hpp"

namespace sparsecol {

void HierarchicalBasis::ensure(int last) const {
  if (static_cast<int>(denominators_.size()) > last) return;
  const int top_level = family_->growth_inverse(last);
  nodes_ = family_->nodes(static_cast<std::size_t>(family_->growth(top_level) + 1));
  const int old = static_cast<int>(denominators_.size());
  for (int i = old; i <= last; ++i) {
    const int support = family_->growth(family_->growth_inverse(i)) + 1;
    double d = 1.0;
    for (int j = 0; j < support; ++j)
      if (j != i) d *= nodes_[i] - nodes_[j];
    denominators_.push_back(d);
    support_.push_back(support);
  }
}

double HierarchicalBasis::eval(int i, double y) const {
  ensure(i);
  double p = 1.0;
  for (int j = 0; j < support_[i]; ++j)
    if (j != i) p *= y - nodes_[j];
  return p / denominators_[i];
}

std::vector<double> HierarchicalBasis::eval_all(int last, double y) const {
  ensure(last);
  std::vector<double> h(static_cast<std::size_t>(last + 1));
  // Running prefix products shared by all h_i of one level.
  std::vector<double> prefix(static_cast<std::size_t>(support_[last] + 1), 1.0);
  for (int j = 0; j < support_[last]; ++j) prefix[j + 1] = prefix[j] * (y - nodes_[j]);
  for (int i = 0; i <= last; ++i) {
    const int s = support_[i];
    if (y == nodes_[i]) {
      h[i] = 1.0;
      continue;
    }
    h[i] = prefix[s] / (y - nodes_[i]) / denominators_[i];
    if (!std::isfinite(h[i])) h[i] = eval(i, y);
  }
  return h;
}

long work(NodeKind kind, const MultiIndex& i) {
  long w = 1;
  for (std::size_t m = 0; m < i.dim(); ++m) w *= level_increment(kind, i[m]);
  return w;
}

namespace {

// Cartesian product of per-dimension integer ranges [lo_m, hi_m], lexicographic.
std::vector<MultiIndex> box(const std::vector<int>& lo, const std::vector<int>& hi) {
  std::vector<MultiIndex> out;
  const std::size_t dim = lo.size();
  for (std::size_t m = 0; m < dim; ++m)
    if (hi[m] < lo[m]) return out;
  MultiIndex cur(lo);
  for (;;) {
    out.push_back(cur);
    std::size_t m = dim;
    while (m > 0) {
      --m;
      if (cur[m] < hi[m]) {
        ++cur[m];
        break;
      }
      cur[m] = lo[m];
      if (m == 0) return out;
    }
    if (dim == 0) return out;
  }
}

} // namespace

std::vector<MultiIndex> new_points(NodeKind kind, const MultiIndex& i) {
  std::vector<int> lo(i.dim()), hi(i.dim());
  for (std::size_t m = 0; m < i.dim(); ++m) {
    lo[m] = growth(kind, i[m] - 1) + 1;
    hi[m] = growth(kind, i[m]);
  }
  return box(lo, hi);
}

std::vector<MultiIndex> tensor_points(NodeKind kind, const MultiIndex& i) {
  std::vector<int> lo(i.dim(), 0), hi(i.dim());
  for (std::size_t m = 0; m < i.dim(); ++m) hi[m] = growth(kind, i[m]);
  return box(lo, hi);
}

IndexSet grid_points(NodeKind kind, const MonotoneIndexSet& set) {
  IndexSet pts;
  for (const auto& i : set.members())
    for (auto& j : new_points(kind, i)) pts.insert(std::move(j));
  return pts;
}

std::vector<double> coordinates(const NodeFamily& family, const MultiIndex& node_index) {
  std::vector<double> y(node_index.dim());
  for (std::size_t m = 0; m < y.size(); ++m) y[m] = family.node(static_cast<std::size_t>(node_index[m]));
  return y;
}

SparseInterpolant::SparseInterpolant(std::shared_ptr<const NodeFamily> family, std::size_t dim,
                                     std::size_t value_size)
    : family_(std::move(family)), set_(dim), value_size_(value_size), basis_(family_), max_node_(dim, 0) {}

void SparseInterpolant::check_point(std::span<const double> y) const {
  if (y.size() != dim()) throw DimensionMismatch("evaluation point has wrong dimension");
  for (double v : y)
    if (!(v >= -1.0 - 1e-14 && v <= 1.0 + 1e-14)) throw DomainError("evaluation point outside [-1,1]^M");
}

SparseInterpolant::AddReport SparseInterpolant::add_index(const MultiIndex& i, const PointEvaluator& f,
                                                          unsigned threads) {
  if (i.dim() != dim()) throw DimensionMismatch("index " + i.str() + " has wrong dimension");
  if (set_.contains(i)) throw MonotonicityViolation("index " + i.str() + " already present");
  if (set_.empty() ? !i.is_zero() : !set_.in_reduced_margin(i))
    throw MonotonicityViolation("index " + i.str() + " is not in the reduced margin");

  AddReport report{i, new_points(kind(), i)};
  const auto& pts = report.new_points;
  std::vector<std::vector<double>> ys(pts.size());
  for (std::size_t p = 0; p < pts.size(); ++p) ys[p] = coordinates(*family_, pts[p]);

  for (std::size_t m = 0; m < dim(); ++m) max_node_[m] = std::max(max_node_[m], family_->growth(i[m]));
  basis_.eval_all(*std::max_element(max_node_.begin(), max_node_.end()), 0.0);

  std::vector<Eigen::VectorXd> values(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t p) {
    values[p] = f(pts[p], ys[p]);
    if (static_cast<std::size_t>(values[p].size()) != value_size_)
      throw DimensionMismatch("evaluator returned a vector of the wrong size");
  });

  Eigen::MatrixXd current;
  if (!grid_.empty()) current = evaluate_many(ys);

  for (std::size_t p = 0; p < pts.size(); ++p) {
    Eigen::VectorXd s = values[p];
    if (current.size()) s -= current.row(static_cast<Eigen::Index>(p)).transpose();
    grid_.emplace(pts[p], rows_.size());
    rows_.push_back(pts[p]);
    surpluses_.insert(surpluses_.end(), s.data(), s.data() + s.size());
  }
  set_.insert(i);
  return report;
}

std::vector<std::vector<double>> SparseInterpolant::basis_tables(std::span<const double> y) const {
  std::vector<std::vector<double>> tables(dim());
  for (std::size_t m = 0; m < dim(); ++m) tables[m] = basis_.eval_all(max_node_[m], y[m]);
  return tables;
}

Eigen::MatrixXd SparseInterpolant::evaluate_many(const std::vector<std::vector<double>>& ys) const {
  if (grid_.empty()) throw InvalidSet("evaluating an empty interpolant");
  const auto n_pts = static_cast<Eigen::Index>(ys.size());
  const auto n_rows = static_cast<Eigen::Index>(rows_.size());
  Eigen::MatrixXd coeff(n_pts, n_rows);
  for (Eigen::Index p = 0; p < n_pts; ++p) {
    check_point(ys[static_cast<std::size_t>(p)]);
    const auto tables = basis_tables(ys[static_cast<std::size_t>(p)]);
    for (Eigen::Index g = 0; g < n_rows; ++g) {
      const MultiIndex& j = rows_[static_cast<std::size_t>(g)];
      double c = 1.0;
      for (std::size_t m = 0; m < dim(); ++m) c *= tables[m][static_cast<std::size_t>(j[m])];
      coeff(p, g) = c;
    }
  }
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> s(
      surpluses_.data(), n_rows, static_cast<Eigen::Index>(value_size_));
  return coeff * s;
}

Eigen::VectorXd SparseInterpolant::evaluate(std::span<const double> y) const {
  return evaluate_many({std::vector<double>(y.begin(), y.end())}).row(0).transpose();
}

Eigen::Map<const Eigen::VectorXd> SparseInterpolant::surplus(std::size_t row) const {
  return {surpluses_.data() + row * value_size_, static_cast<Eigen::Index>(value_size_)};
}

Eigen::Map<const Eigen::VectorXd> SparseInterpolant::surplus(const MultiIndex& node_index) const {
  auto it = grid_.find(node_index);
  if (it == grid_.end()) throw InvalidSet("node " + node_index.str() + " is not a grid point");
  return surplus(it->second);
}

Eigen::VectorXd SparseInterpolant::evaluate_detail(const MultiIndex& i, std::span<const double> y) const {
  if (!set_.contains(i)) throw InvalidSet("index " + i.str() + " is not in the interpolant");
  check_point(y);
  const auto tables = basis_tables(y);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(value_size_));
  for (const auto& j : new_points(kind(), i)) {
    double c = 1.0;
    for (std::size_t m = 0; m < dim(); ++m) c *= tables[m][static_cast<std::size_t>(j[m])];
    out += c * surplus(j);
  }
  return out;
}

nlohmann::json SparseInterpolant::to_json() const {
  nlohmann::json points = nlohmann::json::array();
  // insertion order, so that a reloaded interpolant sums in the same order
  for (std::size_t row = 0; row < rows_.size(); ++row) {
    const auto s = surplus(row);
    points.push_back({{"node_index", rows_[row].entries()}, {"surplus", std::vector<double>(s.begin(), s.end())}});
  }
  return {{"node_family", to_string(kind())},
          {"dim", dim()},
          {"value_size", value_size_},
          {"index_set", sparsecol::to_json(set_.members())},
          {"points", points}};
}

SparseInterpolant SparseInterpolant::from_json(const nlohmann::json& j) {
  const auto family = NodeFamily::get(parse_node_kind(j.at("node_family").get<std::string>()));
  const auto dim = j.at("dim").get<std::size_t>();
  SparseInterpolant p(family, dim, j.at("value_size").get<std::size_t>());
  p.set_ = MonotoneIndexSet::from(index_set_from_json(j.at("index_set")), dim);
  const IndexSet expected = grid_points(p.kind(), p.set_);
  for (const auto& pt : j.at("points")) {
    MultiIndex node(pt.at("node_index").get<std::vector<int>>());
    if (!expected.count(node)) throw InvalidSet("stored point " + node.str() + " is not in the sparse grid");
    const auto s = pt.at("surplus").get<std::vector<double>>();
    if (s.size() != p.value_size_) throw DimensionMismatch("surplus of wrong length at " + node.str());
    for (std::size_t m = 0; m < dim; ++m) p.max_node_[m] = std::max(p.max_node_[m], node[m]);
    p.grid_.emplace(node, p.rows_.size());
    p.rows_.push_back(node);
    p.surpluses_.insert(p.surpluses_.end(), s.begin(), s.end());
  }
  if (p.grid_.size() != expected.size()) throw InvalidSet("stored grid is incomplete");
  p.basis_.eval_all(*std::max_element(p.max_node_.begin(), p.max_node_.end()), 0.0);
  return p;
}

} // namespace sparsecol
