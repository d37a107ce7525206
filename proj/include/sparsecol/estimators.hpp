#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "sparsecol/combination.hpp"
#include "sparsecol/diffusion.hpp"
#include "sparsecol/multi_index.hpp"
#include "sparsecol/sparse_interpolant.hpp"

namespace sparsecol {

/// L^p_mu(Gamma; X) norm settings. p = infinity is a sample maximum.
struct NormSpec {
  double p = 2.0;
  /// Minimum Gauss order per dimension for p outside {2, inf}.
  int quad_order = 8;
  /// Points per dimension of the sample grid for p = inf ...
  int sup_points = 33;
  /// ... reduced so that the grid has at most this many points.
  std::size_t sup_cap = 40000;

  bool is_sup() const { return p == std::numeric_limits<double>::infinity(); }
  static NormSpec l2() { return {}; }
  static NormSpec sup() { return {std::numeric_limits<double>::infinity()}; }
};

/// A polynomial in y with values in a spatial space, given by its values on
/// tensor grids. Value rows must be isometric spatial coordinates, i.e. the
/// Euclidean norm of a row is the spatial norm.
struct ParametricField {
  std::vector<int> degree;
  std::function<RowMatrix(const std::vector<std::vector<double>>& points)> values_on;
};

/// Per-dimension sample points used for p = inf.
std::vector<std::vector<double>> sup_sample_grid(std::size_t dim, const NormSpec& norm);

double parametric_norm(const ParametricField& field, const NormSpec& norm);

/// eta(k) = || Delta_k (a grad u_n) ||_{L^p_mu(Gamma; L^2(D))} for margin
/// indices k, computed from the interpolant u_n alone (no PDE solves).
/// The interpolant must not change while the estimator is alive.
class ResidualEstimator {
public:
  ResidualEstimator(const SparseInterpolant& un, const SpatialDiscretization& disc, NormSpec norm,
                    unsigned threads = 1);

  double eta(const MultiIndex& k);
  /// Estimates for all ks; k need not be in the margin here.
  std::vector<double> eta_all(const std::vector<MultiIndex>& ks);

  /// Delta_k (a grad u_n) in combination-technique form, values in isometric
  /// L^2 coordinates (compressed).
  CombinationDetail detail(const MultiIndex& k);

private:
  void prepare(const std::vector<MultiIndex>& ks);
  double eta_unchecked(const MultiIndex& k) const;
  CombinationDetail detail_unchecked(const MultiIndex& k) const;

  const SparseInterpolant* un_;
  const SpatialDiscretization* disc_;
  NormSpec norm_;
  unsigned threads_;
  std::map<MultiIndex, Eigen::VectorXd> flux_;  // sqrt(h) a grad u_n per node index
};

/// One-shot residual estimator; throws NotInMargin for k outside the margin.
double residual_estimator(const SparseInterpolant& un, const SpatialDiscretization& disc, const MultiIndex& k,
                          const NormSpec& norm);

/// ||Delta_k u||_{L^p_mu(Gamma; H^1_0)} for k in the reduced margin. Solves
/// the PDE at Y_k^+ through the cache, so a later add_index(k) reuses them.
double surplus_indicator(const SparseInterpolant& u_n, const SpatialDiscretization& disc, SolveCache& cache,
                         const MultiIndex& k, const NormSpec& norm, unsigned threads = 1);

/// Envelope-summed estimate over envelope-summed work W.
double profit(NodeKind kind, const IndexSet& envelope, const std::map<MultiIndex, double>& eta);

/// Snapshot of the estimator over one candidate set.
struct EstimatorReport {
  std::vector<MultiIndex> candidates;
  std::vector<double> eta;
  std::vector<long> work;
  std::vector<double> profit;
  double total = 0.0;
  double max = 0.0;
  /// max over the margin / max over the reduced margin (residual estimator).
  double margin_ratio = 1.0;
};

/// u_h on a tensor Gauss-Legendre grid, reused to evaluate
/// ||u - S_Lambda u||_{L^p_mu(Gamma; H^1_0)} for many interpolants.
class ReferenceSolution {
public:
  /// Throws DimensionMismatch if M > 4.
  ReferenceSolution(const SpatialDiscretization& disc, int order, unsigned threads = 1);

  double error(const SparseInterpolant& interpolant, const NormSpec& norm) const;
  std::size_t num_points() const { return points_.size(); }

private:
  std::vector<std::vector<double>> points_;
  std::vector<double> weights_;
  RowMatrix solutions_;  // interior nodal values per point
  const SpatialDiscretization* disc_;
};

double reference_error(const SparseInterpolant& interpolant, const SpatialDiscretization& disc,
                       const NormSpec& norm, int order);

} // namespace sparsecol
