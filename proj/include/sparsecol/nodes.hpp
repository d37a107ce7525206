#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

namespace sparsecol {

enum class NodeKind { Leja, RLeja, ClenshawCurtis };

std::string to_string(NodeKind kind);
/// Accepts "leja", "rleja", "cc" / "clenshaw-curtis" (case-insensitive).
NodeKind parse_node_kind(const std::string& name);

/// Growth function m(k): identity for (R-)Leja, doubling for Clenshaw-Curtis.
/// m(-1) is defined as -1 so that level-0 increments have one point.
int growth(NodeKind kind, int level);

/// Smallest level k with i <= m(k).
int growth_inverse(NodeKind kind, int node_index);

/// Number of nodes added at a level: m(k) - m(k-1).
int level_increment(NodeKind kind, int level);

/// Leja points on [-1,1] starting at -1.
std::vector<double> leja_nodes(std::size_t n);

/// Leja points on the unit circle starting at 1, projected onto the real
/// axis with repeated projections dropped.
std::vector<double> rleja_nodes(std::size_t n);

/// Level-k Clenshaw-Curtis set in hierarchical sequence order
/// (0, -1, 1, then odd numerators level by level).
std::vector<double> clenshaw_curtis_nodes(int level);

/// First n entries of the hierarchical Clenshaw-Curtis sequence.
std::vector<double> clenshaw_curtis_sequence(std::size_t n);

/// Lazily extended, memoized nested node sequence. One shared instance per
/// kind so that every consumer sees bitwise identical nodes.
class NodeFamily {
public:
  static std::shared_ptr<NodeFamily> get(NodeKind kind);

  explicit NodeFamily(NodeKind kind) : kind_(kind) {}

  NodeKind kind() const { return kind_; }
  int growth(int level) const { return sparsecol::growth(kind_, level); }
  int growth_inverse(int node_index) const { return sparsecol::growth_inverse(kind_, node_index); }

  /// First n nodes y_(0..n-1).
  std::vector<double> nodes(std::size_t n) const;
  double node(std::size_t i) const;
  /// Y_k = {y_(i) : i <= m(k)}.
  std::vector<double> level_nodes(int level) const;

private:
  void ensure(std::size_t n) const;

  NodeKind kind_;
  mutable std::mutex mutex_;
  mutable std::vector<double> cache_;
};

/// Lagrange basis values l_i(y), i < nodes.size().
std::vector<double> lagrange_basis(std::span<const double> nodes, double y);

/// Univariate detail weights: the coefficients d_i(y) with
/// (Delta_k f)(y) = sum_{i <= m(k)} f(y_(i)) d_i(y).
std::vector<double> detail_weights(const NodeFamily& family, int level, double y);

/// Max of sum_i |l_i(y)| over an equispaced sample of [-1,1] (lower bound of
/// the Lebesgue constant of I_k).
double lebesgue_constant(NodeKind kind, int level, std::size_t samples);

/// Same for the detail operator: max of sum_i |d_i(y)|.
double detail_lebesgue_constant(NodeKind kind, int level, std::size_t samples);

/// Per-level norm estimates and the smallest c with
/// ||Delta_k|| <= (1 + c k)^theta over the sampled levels.
struct LebesgueDiagnostics {
  NodeKind kind;
  std::vector<double> interpolation_norms;
  std::vector<double> detail_norms;
  double theta = 0.0;
  double c = 0.0;
};

LebesgueDiagnostics lebesgue_diagnostics(NodeKind kind, int max_level, std::size_t samples, double theta);

} // namespace sparsecol
