#include "sparsecol/nodes.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include "sparsecol/error.hpp"

namespace sparsecol {

namespace {

constexpr double kPi = std::numbers::pi;

// log-products are compared with this absolute slack so that mirror-image
// gaps resolve to the smaller abscissa independent of rounding
constexpr double kTieSlack = 1e-12;

struct GapProblem {
  std::function<double(double)> objective;  // log of the product of distances
  std::function<double(double)> slope;      // its derivative
};

// Maximizes a function that is strictly concave between consecutive nodes
// over [lo, hi]. Inside each gap the maximizer is the unique root of the
// slope, located by bisection to adjacent doubles. Endpoints that are not
// nodes are candidates as well.
double maximize_over_gaps(const std::vector<double>& nodes, double lo, double hi, const GapProblem& p) {
  std::vector<double> edges = nodes;
  edges.push_back(lo);
  edges.push_back(hi);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  auto is_node = [&](double t) { return std::find(nodes.begin(), nodes.end(), t) != nodes.end(); };

  std::vector<double> candidates;
  for (std::size_t g = 0; g + 1 < edges.size(); ++g) {
    double left = edges[g], right = edges[g + 1];
    for (;;) {
      const double mid = 0.5 * (left + right);
      if (mid <= left || mid >= right) break;
      if (p.slope(mid) > 0.0)
        left = mid;
      else
        right = mid;
    }
    if (!is_node(left)) candidates.push_back(left);
    if (!is_node(right)) candidates.push_back(right);
  }

  double best_value = -std::numeric_limits<double>::infinity();
  for (double c : candidates) best_value = std::max(best_value, p.objective(c));
  double best = std::numeric_limits<double>::infinity();
  for (double c : candidates)
    if (p.objective(c) >= best_value - kTieSlack) best = std::min(best, c);
  return best;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

} // namespace

std::string to_string(NodeKind kind) {
  switch (kind) {
  case NodeKind::Leja: return "leja";
  case NodeKind::RLeja: return "rleja";
  case NodeKind::ClenshawCurtis: return "cc";
  }
  return "unknown";
}

NodeKind parse_node_kind(const std::string& name) {
  const std::string n = lower(name);
  if (n == "leja") return NodeKind::Leja;
  if (n == "rleja" || n == "r-leja") return NodeKind::RLeja;
  if (n == "cc" || n == "clenshaw-curtis" || n == "clenshawcurtis") return NodeKind::ClenshawCurtis;
  throw ConfigError("unknown node family '" + name + "'");
}

int growth(NodeKind kind, int level) {
  if (level < 0) return -1;
  if (kind == NodeKind::ClenshawCurtis) return level == 0 ? 0 : (1 << level);
  return level;
}

int growth_inverse(NodeKind kind, int node_index) {
  if (node_index <= 0) return 0;
  if (kind != NodeKind::ClenshawCurtis) return node_index;
  int k = 0;
  while (growth(kind, k) < node_index) ++k;
  return k;
}

int level_increment(NodeKind kind, int level) { return growth(kind, level) - growth(kind, level - 1); }

std::vector<double> leja_nodes(std::size_t n) {
  std::vector<double> y;
  if (n == 0) return y;
  y.push_back(-1.0);
  while (y.size() < n) {
    GapProblem p{
        [&](double t) {
          double s = 0.0;
          for (double yi : y) s += std::log(std::abs(t - yi));
          return s;
        },
        [&](double t) {
          double s = 0.0;
          for (double yi : y) s += 1.0 / (t - yi);
          return s;
        }};
    y.push_back(maximize_over_gaps(y, -1.0, 1.0, p));
  }
  return y;
}

std::vector<double> rleja_nodes(std::size_t n) {
  std::vector<double> y;
  if (n == 0) return y;
  // Angles on [0, 2pi]; 2pi is the same point as the anchor 0.
  std::vector<double> phi{0.0};
  y.push_back(1.0);
  while (y.size() < n) {
    std::vector<double> nodes = phi;
    nodes.push_back(2.0 * kPi);
    GapProblem p{
        [&](double t) {
          double s = 0.0;
          for (double a : phi) s += std::log(std::abs(2.0 * std::sin(0.5 * (t - a))));
          return s;
        },
        [&](double t) {
          double s = 0.0;
          for (double a : phi) s += 0.5 / std::tan(0.5 * (t - a));
          return s;
        }};
    const double t = maximize_over_gaps(nodes, 0.0, 2.0 * kPi, p);
    phi.push_back(t);
    double proj = std::cos(t);
    if (std::abs(proj) < 1e-15) proj = 0.0;
    const bool repeated = std::any_of(y.begin(), y.end(), [&](double v) { return std::abs(v - proj) < 1e-12; });
    if (!repeated) y.push_back(proj);
  }
  return y;
}

std::vector<double> clenshaw_curtis_sequence(std::size_t n) {
  std::vector<double> y;
  y.reserve(n);
  if (n > 0) y.push_back(0.0);
  if (n > 1) y.push_back(-1.0);
  if (n > 2) y.push_back(1.0);
  for (int level = 2; y.size() < n; ++level) {
    const int denom = 1 << level;
    for (int i = 1; i < denom && y.size() < n; i += 2) y.push_back(-std::cos(kPi * i / denom));
  }
  return y;
}

std::vector<double> clenshaw_curtis_nodes(int level) {
  return clenshaw_curtis_sequence(static_cast<std::size_t>(growth(NodeKind::ClenshawCurtis, level) + 1));
}

std::shared_ptr<NodeFamily> NodeFamily::get(NodeKind kind) {
  static const std::array<std::shared_ptr<NodeFamily>, 3> families{
      std::make_shared<NodeFamily>(NodeKind::Leja), std::make_shared<NodeFamily>(NodeKind::RLeja),
      std::make_shared<NodeFamily>(NodeKind::ClenshawCurtis)};
  return families[static_cast<std::size_t>(kind)];
}

void NodeFamily::ensure(std::size_t n) const {
  if (cache_.size() >= n) return;
  // Regenerating from scratch yields the same prefix bitwise, so extending by
  // replacement keeps previously handed-out values valid.
  const std::size_t target = std::max(n, 2 * cache_.size());
  switch (kind_) {
  case NodeKind::Leja: cache_ = leja_nodes(target); break;
  case NodeKind::RLeja: cache_ = rleja_nodes(target); break;
  case NodeKind::ClenshawCurtis: cache_ = clenshaw_curtis_sequence(target); break;
  }
}

std::vector<double> NodeFamily::nodes(std::size_t n) const {
  std::lock_guard lock(mutex_);
  ensure(n);
  return {cache_.begin(), cache_.begin() + static_cast<std::ptrdiff_t>(n)};
}

double NodeFamily::node(std::size_t i) const {
  std::lock_guard lock(mutex_);
  ensure(i + 1);
  return cache_[i];
}

std::vector<double> NodeFamily::level_nodes(int level) const {
  return nodes(static_cast<std::size_t>(growth(level) + 1));
}

std::vector<double> lagrange_basis(std::span<const double> nodes, double y) {
  const std::size_t n = nodes.size();
  std::vector<double> l(n, 1.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) l[i] *= (y - nodes[j]) / (nodes[i] - nodes[j]);
  return l;
}

std::vector<double> detail_weights(const NodeFamily& family, int level, double y) {
  const std::vector<double> fine = family.level_nodes(level);
  std::vector<double> d = lagrange_basis(fine, y);
  if (level > 0) {
    const std::size_t coarse_n = static_cast<std::size_t>(family.growth(level - 1) + 1);
    const std::vector<double> coarse =
        lagrange_basis(std::span<const double>(fine.data(), coarse_n), y);
    for (std::size_t i = 0; i < coarse_n; ++i) d[i] -= coarse[i];
  }
  return d;
}

namespace {

double sampled_max(std::size_t samples, const std::function<double(double)>& fn) {
  const std::size_t n = std::max<std::size_t>(samples, 2);
  double best = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    const double y = -1.0 + 2.0 * static_cast<double>(s) / static_cast<double>(n - 1);
    best = std::max(best, fn(y));
  }
  return best;
}

double abs_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

} // namespace

double lebesgue_constant(NodeKind kind, int level, std::size_t samples) {
  const auto family = NodeFamily::get(kind);
  const std::vector<double> nodes = family->level_nodes(level);
  return sampled_max(samples, [&](double y) { return abs_sum(lagrange_basis(nodes, y)); });
}

double detail_lebesgue_constant(NodeKind kind, int level, std::size_t samples) {
  const auto family = NodeFamily::get(kind);
  family->level_nodes(level);
  return sampled_max(samples, [&](double y) { return abs_sum(detail_weights(*family, level, y)); });
}

LebesgueDiagnostics lebesgue_diagnostics(NodeKind kind, int max_level, std::size_t samples, double theta) {
  LebesgueDiagnostics d{kind, {}, {}, theta, 0.0};
  for (int k = 0; k <= max_level; ++k) {
    d.interpolation_norms.push_back(lebesgue_constant(kind, k, samples));
    d.detail_norms.push_back(detail_lebesgue_constant(kind, k, samples));
    if (k >= 1 && theta > 0.0)
      d.c = std::max(d.c, (std::pow(d.detail_norms.back(), 1.0 / theta) - 1.0) / k);
  }
  return d;
}

} // namespace sparsecol
