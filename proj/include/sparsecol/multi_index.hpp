#pragma once

#include <compare>
#include <cstddef>
#include <initializer_list>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace sparsecol {

/// A point of N_0^M. Ordered lexicographically.
class MultiIndex {
public:
  MultiIndex() = default;
  explicit MultiIndex(std::size_t dim) : entries_(dim, 0) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}

  static MultiIndex zero(std::size_t dim) { return MultiIndex(dim); }
  static MultiIndex unit(std::size_t dim, std::size_t m) {
    MultiIndex e(dim);
    e.entries_[m] = 1;
    return e;
  }

  std::size_t dim() const { return entries_.size(); }
  int operator[](std::size_t m) const { return entries_[m]; }
  int& operator[](std::size_t m) { return entries_[m]; }
  const std::vector<int>& entries() const { return entries_; }

  int total() const;
  bool is_zero() const { return total() == 0; }

  /// Componentwise j <= k.
  bool leq(const MultiIndex& other) const;

  MultiIndex incremented(std::size_t m) const {
    MultiIndex r = *this;
    ++r.entries_[m];
    return r;
  }
  MultiIndex decremented(std::size_t m) const {
    MultiIndex r = *this;
    --r.entries_[m];
    return r;
  }

  std::string str() const;

  auto operator<=>(const MultiIndex&) const = default;
  bool operator==(const MultiIndex&) const = default;

private:
  std::vector<int> entries_;
};

using IndexSet = std::set<MultiIndex>;

/// True iff every member's predecessors (in components >= 1) are members.
bool is_monotone(const IndexSet& s);

/// Downward-closed finite subset of N_0^M with incrementally maintained
/// margin and reduced margin.
class MonotoneIndexSet {
public:
  explicit MonotoneIndexSet(std::size_t dim) : dim_(dim) {}

  /// {0}
  static MonotoneIndexSet root(std::size_t dim);
  /// Validates downward-closedness; throws MonotonicityViolation otherwise.
  static MonotoneIndexSet from(const IndexSet& members, std::size_t dim);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(const MultiIndex& k) const { return members_.count(k) != 0; }
  const IndexSet& members() const { return members_; }

  const IndexSet& margin() const;
  const IndexSet& reduced_margin() const;

  bool in_margin(const MultiIndex& k) const { return margin_.count(k) != 0; }
  bool in_reduced_margin(const MultiIndex& k) const { return reduced_.count(k) != 0; }

  /// Adds k, which must be admissible (reduced margin, or the zero index of
  /// an empty set).
  void insert(const MultiIndex& k);

  /// Adds a set whose union with this set is monotone, in an admissible order.
  void insert_all(const IndexSet& ks);

  bool operator==(const MonotoneIndexSet& o) const { return members_ == o.members_; }

private:
  void check_dim(const MultiIndex& k) const;
  bool all_predecessors_in(const MultiIndex& k) const;

  std::size_t dim_;
  IndexSet members_;
  IndexSet margin_;
  IndexSet reduced_;
};

IndexSet margin(const MonotoneIndexSet& set);
IndexSet reduced_margin(const MonotoneIndexSet& set);

/// Smallest subset E of the margin with k in E and set u E monotone.
IndexSet monotone_envelope(const MonotoneIndexSet& set, const MultiIndex& k);

/// Sort key that lists predecessors before successors: total order, then
/// lexicographic.
bool admissible_order(const MultiIndex& a, const MultiIndex& b);

nlohmann::json to_json(const IndexSet& s);
IndexSet index_set_from_json(const nlohmann::json& j);

} // namespace sparsecol
