#include "sparsecol/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "sparsecol/error.hpp"

namespace sparsecol {

DiffusionProblem::DiffusionProblem(ScalarField a0, std::vector<ScalarField> am, ScalarField rhs,
                                   nlohmann::json descriptor)
    : a0_(std::move(a0)), am_(std::move(am)), rhs_(std::move(rhs)), descriptor_(std::move(descriptor)) {}

namespace {

ScalarField rhs_from_json(const nlohmann::json& r) {
  const std::string type = r.value("type", "constant");
  if (type == "constant") {
    const double v = r.value("value", 1.0);
    return [v](double) { return v; };
  }
  if (type == "sine") {
    const double amp = r.value("amplitude", 1.0);
    return [amp](double x) { return amp * std::sin(std::numbers::pi * x); };
  }
  throw ConfigError("unknown right-hand side type '" + type + "'");
}

} // namespace

DiffusionProblem DiffusionProblem::from_json(const nlohmann::json& j) {
  const auto dim = j.at("M").get<std::size_t>();
  if (dim < 1) throw ConfigError("M must be at least 1");
  const nlohmann::json coef = j.value("coefficient", nlohmann::json::object());
  const std::string family = coef.value("family", "cosine");
  const ScalarField rhs = rhs_from_json(j.value("rhs", nlohmann::json::object()));

  if (family == "constant") {
    const double a0 = coef.value("a0", 1.0);
    auto am = coef.value("am", std::vector<double>(dim, 0.0));
    if (am.size() != dim) throw ConfigError("coefficient.am must have M entries");
    std::vector<ScalarField> fields;
    for (double v : am) fields.push_back([v](double) { return v; });
    return {[a0](double) { return a0; }, std::move(fields), rhs, j};
  }

  const double a0 = coef.value("a0", 1.0);
  const double gamma = coef.value("gamma", 0.4);
  const double sigma = coef.value("sigma", 2.0);
  std::vector<ScalarField> fields;
  for (std::size_t m = 1; m <= dim; ++m) {
    const double scale = gamma * std::pow(static_cast<double>(m), -sigma);
    if (family == "cosine") {
      fields.push_back([scale, m](double x) { return scale * std::cos(static_cast<double>(m) * std::numbers::pi * x); });
    } else if (family == "inclusions") {
      const double lo = static_cast<double>(m - 1) / static_cast<double>(dim);
      const double hi = static_cast<double>(m) / static_cast<double>(dim);
      fields.push_back([scale, lo, hi](double x) { return (x >= lo && x < hi) ? scale : 0.0; });
    } else {
      throw ConfigError("unknown coefficient family '" + family + "'");
    }
  }
  return {[a0](double) { return a0; }, std::move(fields), rhs, j};
}

DiffusionProblem DiffusionProblem::constant(double a0, std::vector<double> am, double rhs) {
  nlohmann::json d = {{"M", am.size()},
                      {"coefficient", {{"family", "constant"}, {"a0", a0}, {"am", am}}},
                      {"rhs", {{"type", "constant"}, {"value", rhs}}}};
  return from_json(d);
}

double DiffusionProblem::coefficient(double x, std::span<const double> y) const {
  if (y.size() != am_.size()) throw DimensionMismatch("parameter has wrong dimension");
  double a = a0_(x);
  for (std::size_t m = 0; m < am_.size(); ++m) a += am_[m](x) * y[m];
  return a;
}

double coefficient_eval(const DiffusionProblem& problem, double x, std::span<const double> y) {
  return problem.coefficient(x, y);
}

SpatialDiscretization::SpatialDiscretization(const DiffusionProblem& problem, std::size_t elements)
    : n_(elements), h_(1.0 / static_cast<double>(elements)) {
  if (elements < 2) throw ConfigError("mesh needs at least 2 elements");
  const auto dim = static_cast<Eigen::Index>(problem.dim());
  const auto n = static_cast<Eigen::Index>(n_);
  coef_.resize(dim + 1, n);
  f_avg_.resize(n);
  // 3-point Gauss rule for the element averages of f
  const double g = std::sqrt(0.6);
  for (Eigen::Index e = 0; e < n; ++e) {
    const double xm = midpoint(static_cast<std::size_t>(e));
    coef_(0, e) = problem.a0()(xm);
    for (Eigen::Index m = 0; m < dim; ++m) coef_(m + 1, e) = problem.am(static_cast<std::size_t>(m))(xm);
    const double r = 0.5 * h_;
    f_avg_(e) = (5.0 * problem.rhs()(xm - g * r) + 8.0 * problem.rhs()(xm) + 5.0 * problem.rhs()(xm + g * r)) / 18.0;
  }
  load_.resize(n - 1);
  for (Eigen::Index i = 0; i < n - 1; ++i) load_(i) = 0.5 * h_ * (f_avg_(i) + f_avg_(i + 1));
}

Eigen::VectorXd SpatialDiscretization::element_coefficient(std::span<const double> y) const {
  if (static_cast<Eigen::Index>(y.size()) != coef_.rows() - 1) throw DimensionMismatch("parameter has wrong dimension");
  Eigen::VectorXd a = coef_.row(0).transpose();
  for (std::size_t m = 0; m < y.size(); ++m) a += y[m] * coef_.row(static_cast<Eigen::Index>(m) + 1).transpose();
  return a;
}

Eigen::VectorXd SpatialDiscretization::interpolate(const ScalarField& g) const {
  Eigen::VectorXd v(static_cast<Eigen::Index>(dofs()));
  for (std::size_t i = 0; i < dofs(); ++i) v(static_cast<Eigen::Index>(i)) = g(node(i + 1));
  return v;
}

Eigen::VectorXd SpatialDiscretization::gradient(const Eigen::VectorXd& u) const {
  if (static_cast<std::size_t>(u.size()) != dofs()) throw DimensionMismatch("vector does not match the mesh");
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::VectorXd d(n);
  for (Eigen::Index e = 0; e < n; ++e) {
    const double left = e == 0 ? 0.0 : u(e - 1);
    const double right = e == n - 1 ? 0.0 : u(e);
    d(e) = (right - left) / h_;
  }
  return d;
}

Eigen::VectorXd SpatialDiscretization::flux(const Eigen::VectorXd& u, std::span<const double> y) const {
  return element_coefficient(y).cwiseProduct(gradient(u));
}

Eigen::VectorXd SpatialDiscretization::h1_coordinates(const Eigen::VectorXd& u) const {
  return std::sqrt(h_) * gradient(u);
}

Eigen::VectorXd SpatialDiscretization::element_l2_coordinates(const Eigen::VectorXd& g) const {
  if (static_cast<std::size_t>(g.size()) != n_) throw DimensionMismatch("element data does not match the mesh");
  return std::sqrt(h_) * g;
}

EllipticityReport check_ellipticity(const DiffusionProblem& problem, const SpatialDiscretization& disc) {
  const auto& c = disc.coefficient_samples();
  double a_min = std::numeric_limits<double>::infinity();
  double a_max = 0.0;
  double a0_inf = std::numeric_limits<double>::infinity();
  for (Eigen::Index e = 0; e < c.cols(); ++e) {
    double spread = 0.0;
    for (Eigen::Index m = 1; m < c.rows(); ++m) spread += std::abs(c(m, e));
    const double lo = c(0, e) - spread;
    if (!(lo > 0.0)) {
      const double x = disc.midpoint(static_cast<std::size_t>(e));
      throw EllipticityViolation("uniform ellipticity violated at x = " + std::to_string(x) +
                                     " (a_0 - sum |a_m| = " + std::to_string(lo) + ")",
                                 x);
    }
    a_min = std::min(a_min, lo);
    a_max = std::max(a_max, c(0, e) + spread);
    a0_inf = std::min(a0_inf, c(0, e));
  }
  (void)problem;
  return {a_min, a_max, 1.0 - a_min / a0_inf, a_min};
}

Eigen::VectorXd solve_at(const SpatialDiscretization& disc, std::span<const double> y) {
  const Eigen::VectorXd a = disc.element_coefficient(y);
  const std::size_t n = disc.dofs();
  const double inv_h = 1.0 / disc.h();
  // interior node i (0-based) couples elements i and i+1
  std::vector<double> diag(n), upper(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    diag[i] = (a(e) + a(e + 1)) * inv_h;
    upper[i] = i + 1 < n ? -a(e + 1) * inv_h : 0.0;
    rhs[i] = disc.load()(e);
  }
  for (std::size_t i = 1; i < n; ++i) {
    if (!(diag[i - 1] > 0.0)) throw NumericalError("singular stiffness matrix");
    const double w = upper[i - 1] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  if (!(diag[n - 1] > 0.0)) throw NumericalError("singular stiffness matrix");
  Eigen::VectorXd u(static_cast<Eigen::Index>(n));
  u(static_cast<Eigen::Index>(n - 1)) = rhs[n - 1] / diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;)
    u(static_cast<Eigen::Index>(i)) = (rhs[i] - upper[i] * u(static_cast<Eigen::Index>(i + 1))) / diag[i];
  return u;
}

double spatial_norm(const SpatialDiscretization& disc, const Eigen::VectorXd& v, SpatialNorm which) {
  if (static_cast<std::size_t>(v.size()) != disc.dofs()) throw DimensionMismatch("vector does not match the mesh");
  if (which == SpatialNorm::H1Seminorm) return disc.h1_coordinates(v).norm();
  // P1 mass matrix, element contribution h/6 [2 1; 1 2]
  double s = 0.0;
  const auto n = static_cast<Eigen::Index>(disc.elements());
  for (Eigen::Index e = 0; e < n; ++e) {
    const double l = e == 0 ? 0.0 : v(e - 1);
    const double r = e == n - 1 ? 0.0 : v(e);
    s += disc.h() / 6.0 * (2.0 * l * l + 2.0 * l * r + 2.0 * r * r);
  }
  return std::sqrt(s);
}

void write_solution_csv(const SpatialDiscretization& disc, const Eigen::VectorXd& u, std::ostream& out) {
  if (static_cast<std::size_t>(u.size()) != disc.dofs()) throw DimensionMismatch("vector does not match the mesh");
  char buf[64];
  out << "x,u\n";
  for (std::size_t i = 0; i <= disc.elements(); ++i) {
    const double v = (i == 0 || i == disc.elements()) ? 0.0 : u(static_cast<Eigen::Index>(i - 1));
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", disc.node(i), v);
    out << buf;
  }
}

double element_l2_norm(const SpatialDiscretization& disc, const Eigen::VectorXd& g) {
  return disc.element_l2_coordinates(g).norm();
}

Eigen::VectorXd SolveCache::get(const MultiIndex& node_index, std::span<const double> y) {
  {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(node_index);
    if (it != entries_.end()) return it->second;
  }
  Eigen::VectorXd u = solve_at(*disc_, y);
  std::lock_guard lock(mutex_);
  return entries_.emplace(node_index, std::move(u)).first->second;
}

bool SolveCache::contains(const MultiIndex& node_index) const {
  std::lock_guard lock(mutex_);
  return entries_.count(node_index) != 0;
}

std::size_t SolveCache::size() const {
  std::lock_guard lock(mutex_);
  return entries_.size();
}

} // namespace sparsecol
