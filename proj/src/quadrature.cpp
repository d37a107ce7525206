#include "sparsecol/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace sparsecol {

namespace {

Rule1d compute_gauss_legendre(std::size_t n) {
  Rule1d r{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0, p1 = x;
    for (std::size_t k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
      p0 = p1;
      p1 = p2;
    }
    if (n == 1) p0 = 1.0;
    dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2), halved
    r.points[i] = -x;
    r.points[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.points[n / 2] = 0.0;
  return r;
}

} // namespace

Rule1d gauss_legendre(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, Rule1d> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

std::vector<double> equispaced(std::size_t n) {
  if (n == 1) return {0.0};
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
  return y;
}

} // namespace sparsecol
