#pragma once

#include <cstddef>
#include <vector>

namespace sparsecol {

struct Rule1d {
  std::vector<double> points;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1,1] with weights summing to 1, i.e.
/// integrating against the uniform probability measure dy/2.
Rule1d gauss_legendre(std::size_t n);

/// n equispaced points on [-1,1] including both endpoints (weights unused).
std::vector<double> equispaced(std::size_t n);

} // namespace sparsecol
