#pragma once

/// @file id_set.hpp
/// Canonical sets of symbolic identifiers.
///
/// An IdSet keeps its members sorted lexicographically and free of
/// duplicates, so two sets are equal exactly when their member vectors are.
/// The tag parameter keeps equation sets, fault sets and variable sets from
/// being mixed up.

#include <algorithm>
#include <compare>
#include <initializer_list>
#include <iterator>
#include <string>
#include <string_view>
#include <vector>

namespace structdiag {

template <class Tag>
class IdSet {
 public:
  using value_type = std::string;
  using const_iterator = std::vector<std::string>::const_iterator;

  IdSet() = default;
  IdSet(std::initializer_list<std::string> ids)
      : IdSet(std::vector<std::string>(ids)) {}
  explicit IdSet(std::vector<std::string> ids) : members_(std::move(ids)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()),
                   members_.end());
  }

  const std::vector<std::string>& members() const noexcept { return members_; }
  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const_iterator begin() const noexcept { return members_.begin(); }
  const_iterator end() const noexcept { return members_.end(); }

  bool contains(std::string_view id) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), id);
    return it != members_.end() && *it == id;
  }

  bool is_subset_of(const IdSet& other) const {
    return std::includes(other.members_.begin(), other.members_.end(),
                         members_.begin(), members_.end());
  }

  IdSet with(std::string id) const {
    IdSet out = *this;
    auto it = std::lower_bound(out.members_.begin(), out.members_.end(), id);
    if (it == out.members_.end() || *it != id) out.members_.insert(it, std::move(id));
    return out;
  }

  IdSet without(std::string_view id) const {
    IdSet out = *this;
    auto it = std::lower_bound(out.members_.begin(), out.members_.end(), id);
    if (it != out.members_.end() && *it == id) out.members_.erase(it);
    return out;
  }

  friend IdSet operator|(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                   std::back_inserter(out.members_));
    return out;
  }
  friend IdSet operator&(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(out.members_));
    return out;
  }
  friend IdSet operator-(const IdSet& a, const IdSet& b) {
    IdSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out.members_));
    return out;
  }

  friend bool operator==(const IdSet&, const IdSet&) = default;
  friend auto operator<=>(const IdSet& a, const IdSet& b) {
    return a.members_ <=> b.members_;
  }

  /// "{a,b,c}"
  std::string to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < members_.size(); ++i) {
      if (i) out += ',';
      out += members_[i];
    }
    out += '}';
    return out;
  }

 private:
  std::vector<std::string> members_;
};

/// Output ordering used for every result collection: by size, then ids.
struct CanonicalOrder {
  template <class Tag>
  bool operator()(const IdSet<Tag>& a, const IdSet<Tag>& b) const {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  }
};

struct EquationTag {};
struct FaultTag {};
struct UnknownTag {};

using EquationSet = IdSet<EquationTag>;
using FaultSignature = IdSet<FaultTag>;
using VariableSet = IdSet<UnknownTag>;

}  // namespace structdiag
