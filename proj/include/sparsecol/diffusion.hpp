#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include <json.hpp>

#include "sparsecol/multi_index.hpp"

namespace sparsecol {

using ScalarField = std::function<double(double)>;

/// -(a(x,y) u')' = f on (0,1), u(0) = u(1) = 0, with the affine coefficient
/// a(x,y) = a_0(x) + sum_m a_m(x) y_m, y in [-1,1]^M.
class DiffusionProblem {
public:
  DiffusionProblem(ScalarField a0, std::vector<ScalarField> am, ScalarField rhs, nlohmann::json descriptor = {});

  /// Built-in problems, see README for the JSON layout:
  ///   cosine:     a_m(x) = gamma m^-sigma cos(m pi x)
  ///   inclusions: a_m = gamma m^-sigma on the m-th of M equal subintervals
  ///   constant:   a_0 and every a_m constant
  static DiffusionProblem from_json(const nlohmann::json& j);

  static DiffusionProblem constant(double a0, std::vector<double> am, double rhs);

  std::size_t dim() const { return am_.size(); }
  double coefficient(double x, std::span<const double> y) const;
  const ScalarField& a0() const { return a0_; }
  const ScalarField& am(std::size_t m) const { return am_[m]; }
  const ScalarField& rhs() const { return rhs_; }
  const nlohmann::json& descriptor() const { return descriptor_; }

private:
  ScalarField a0_;
  std::vector<ScalarField> am_;
  ScalarField rhs_;
  nlohmann::json descriptor_;
};

/// Uniform P1 discretization of (0,1) with N elements; unknowns are the N-1
/// interior nodal values.
class SpatialDiscretization {
public:
  SpatialDiscretization(const DiffusionProblem& problem, std::size_t elements);

  std::size_t elements() const { return n_; }
  std::size_t dofs() const { return n_ - 1; }
  std::size_t dim() const { return static_cast<std::size_t>(coef_.rows()) - 1; }
  double h() const { return h_; }
  double node(std::size_t i) const { return static_cast<double>(i) * h_; }
  double midpoint(std::size_t e) const { return (static_cast<double>(e) + 0.5) * h_; }

  /// a(x_e, y) at every element midpoint.
  Eigen::VectorXd element_coefficient(std::span<const double> y) const;
  /// row 0: a_0, row m: a_m, sampled at midpoints
  const Eigen::MatrixXd& coefficient_samples() const { return coef_; }
  const Eigen::VectorXd& load() const { return load_; }
  const Eigen::VectorXd& element_rhs() const { return f_avg_; }

  /// Nodal interpolant of g on the interior nodes.
  Eigen::VectorXd interpolate(const ScalarField& g) const;

  /// Per-element derivative of a P1 function given by interior values.
  Eigen::VectorXd gradient(const Eigen::VectorXd& u) const;

  /// Per-element a(x_e,y) u'_e.
  Eigen::VectorXd flux(const Eigen::VectorXd& u, std::span<const double> y) const;

  /// Coordinates whose Euclidean norm is the H^1_0 seminorm of u.
  Eigen::VectorXd h1_coordinates(const Eigen::VectorXd& u) const;
  /// Coordinates whose Euclidean norm is the L^2 norm of element-constant data.
  Eigen::VectorXd element_l2_coordinates(const Eigen::VectorXd& g) const;

private:
  std::size_t n_;
  double h_;
  Eigen::MatrixXd coef_;
  Eigen::VectorXd f_avg_;
  Eigen::VectorXd load_;
};

struct EllipticityReport {
  double a_min;
  double a_max;
  double alpha;
  double r_effective;
};

/// Throws EllipticityViolation if a_0 - sum |a_m| <= 0 at some midpoint.
EllipticityReport check_ellipticity(const DiffusionProblem& problem, const SpatialDiscretization& disc);

double coefficient_eval(const DiffusionProblem& problem, double x, std::span<const double> y);

/// Galerkin solution at parameter y (Thomas algorithm on the tridiagonal
/// stiffness with midpoint coefficient values).
Eigen::VectorXd solve_at(const SpatialDiscretization& disc, std::span<const double> y);

enum class SpatialNorm { H1Seminorm, L2 };

/// Norm of a P1 function given by interior nodal values.
double spatial_norm(const SpatialDiscretization& disc, const Eigen::VectorXd& v, SpatialNorm which);

/// CSV snapshot "x,u" over all mesh nodes including the boundary.
void write_solution_csv(const SpatialDiscretization& disc, const Eigen::VectorXd& u, std::ostream& out);

/// L^2 norm of element-constant data (fluxes, gradients).
double element_l2_norm(const SpatialDiscretization& disc, const Eigen::VectorXd& g);

/// Insert-once cache of PDE solutions keyed by grid node index. Safe for
/// concurrent use; the number of distinct entries is the solve count.
class SolveCache {
public:
  explicit SolveCache(const SpatialDiscretization& disc) : disc_(&disc) {}

  Eigen::VectorXd get(const MultiIndex& node_index, std::span<const double> y);
  bool contains(const MultiIndex& node_index) const;
  std::size_t size() const;

private:
  const SpatialDiscretization* disc_;
  mutable std::mutex mutex_;
  std::map<MultiIndex, Eigen::VectorXd> entries_;
};

} // namespace sparsecol
