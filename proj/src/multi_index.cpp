#include "sparsecol/multi_index.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "sparsecol/error.hpp"

namespace sparsecol {

int MultiIndex::total() const { return std::accumulate(entries_.begin(), entries_.end(), 0); }

bool MultiIndex::leq(const MultiIndex& other) const {
  for (std::size_t m = 0; m < entries_.size(); ++m)
    if (entries_[m] > other.entries_[m]) return false;
  return true;
}

std::string MultiIndex::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t m = 0; m < entries_.size(); ++m) os << (m ? "," : "") << entries_[m];
  os << ')';
  return os.str();
}

bool is_monotone(const IndexSet& s) {
  if (s.empty()) return true;
  const std::size_t dim = s.begin()->dim();
  for (const auto& k : s) {
    if (k.dim() != dim)
      throw DimensionMismatch("index " + k.str() + " has dimension " + std::to_string(k.dim()) +
                              ", expected " + std::to_string(dim));
  }
  for (const auto& k : s) {
    for (std::size_t m = 0; m < dim; ++m)
      if (k[m] >= 1 && !s.count(k.decremented(m))) return false;
  }
  return true;
}

bool admissible_order(const MultiIndex& a, const MultiIndex& b) {
  const int ta = a.total(), tb = b.total();
  if (ta != tb) return ta < tb;
  return a < b;
}

MonotoneIndexSet MonotoneIndexSet::root(std::size_t dim) {
  MonotoneIndexSet s(dim);
  s.insert(MultiIndex::zero(dim));
  return s;
}

MonotoneIndexSet MonotoneIndexSet::from(const IndexSet& members, std::size_t dim) {
  for (const auto& k : members)
    if (k.dim() != dim) throw DimensionMismatch("index " + k.str() + " does not have dimension " + std::to_string(dim));
  if (!is_monotone(members)) throw MonotonicityViolation("index set is not downward-closed");
  std::vector<MultiIndex> order(members.begin(), members.end());
  std::sort(order.begin(), order.end(), admissible_order);
  MonotoneIndexSet s(dim);
  for (const auto& k : order) s.insert(k);
  return s;
}

void MonotoneIndexSet::check_dim(const MultiIndex& k) const {
  if (k.dim() != dim_)
    throw DimensionMismatch("index " + k.str() + " does not have dimension " + std::to_string(dim_));
}

bool MonotoneIndexSet::all_predecessors_in(const MultiIndex& k) const {
  for (std::size_t m = 0; m < dim_; ++m)
    if (k[m] >= 1 && !members_.count(k.decremented(m))) return false;
  return true;
}

const IndexSet& MonotoneIndexSet::margin() const {
  if (members_.empty()) throw InvalidSet("margin of an empty index set");
  return margin_;
}

const IndexSet& MonotoneIndexSet::reduced_margin() const {
  if (members_.empty()) throw InvalidSet("reduced margin of an empty index set");
  return reduced_;
}

void MonotoneIndexSet::insert(const MultiIndex& index) {
  const MultiIndex k = index;  // index may alias an element of margin_ or reduced_
  check_dim(k);
  if (members_.count(k)) return;
  if (members_.empty()) {
    if (!k.is_zero()) throw MonotonicityViolation("first index must be zero, got " + k.str());
  } else if (!reduced_.count(k)) {
    throw MonotonicityViolation("index " + k.str() + " is not in the reduced margin");
  }
  members_.insert(k);
  margin_.erase(k);
  reduced_.erase(k);
  for (std::size_t m = 0; m < dim_; ++m) {
    const MultiIndex next = k.incremented(m);
    if (members_.count(next)) continue;
    margin_.insert(next);
    if (all_predecessors_in(next)) reduced_.insert(next);
  }
}

void MonotoneIndexSet::insert_all(const IndexSet& ks) {
  std::vector<MultiIndex> order(ks.begin(), ks.end());
  std::sort(order.begin(), order.end(), admissible_order);
  for (const auto& k : order) insert(k);
}

IndexSet margin(const MonotoneIndexSet& set) { return set.margin(); }

IndexSet reduced_margin(const MonotoneIndexSet& set) { return set.reduced_margin(); }

IndexSet monotone_envelope(const MonotoneIndexSet& set, const MultiIndex& k) {
  if (k.dim() != set.dim()) throw DimensionMismatch("envelope target " + k.str() + " has wrong dimension");
  if (set.empty() || !set.in_margin(k)) throw NotInMargin("index " + k.str() + " is not in the margin");
  // All ancestors of k outside the set; each of them lies in the margin.
  IndexSet envelope{k};
  std::deque<MultiIndex> queue{k};
  while (!queue.empty()) {
    const MultiIndex e = queue.front();
    queue.pop_front();
    for (std::size_t m = 0; m < e.dim(); ++m) {
      if (e[m] == 0) continue;
      MultiIndex p = e.decremented(m);
      if (set.contains(p) || envelope.count(p)) continue;
      envelope.insert(p);
      queue.push_back(std::move(p));
    }
  }
  return envelope;
}

nlohmann::json to_json(const IndexSet& s) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& k : s) arr.push_back(k.entries());
  return arr;
}

IndexSet index_set_from_json(const nlohmann::json& j) {
  IndexSet s;
  for (const auto& e : j) s.insert(MultiIndex(e.get<std::vector<int>>()));
  return s;
}

} // namespace sparsecol
