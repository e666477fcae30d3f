#include "structdiag/enumerate.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "structdiag/error.hpp"
#include "structdiag/graph.hpp"

namespace structdiag {

namespace {

void sort_canonical(std::vector<EquationSet>& sets) {
  std::sort(sets.begin(), sets.end(), CanonicalOrder{});
}

void sort_canonical(std::vector<RgResult>& results) {
  std::sort(results.begin(), results.end(), [](const RgResult& a, const RgResult& b) {
    return CanonicalOrder{}(a.set, b.set);
  });
}

IndexSet ranks_from_mask(const IndexSet& eqs, unsigned long long mask) {
  IndexSet out;
  for (std::size_t i = 0; i < eqs.size(); ++i)
    if (mask >> i & 1ULL) out.push_back(eqs[i]);
  return out;
}

void check_bound(std::size_t n, std::size_t bound) {
  if (n > bound || n >= 63)
    throw OracleBoundError("oracle bound exceeded: " + std::to_string(n) +
                           " equations > " + std::to_string(bound));
}

RgResult make_result(const StructuralModel& model, const IndexSet& eqs) {
  RgResult r;
  r.set = model.set_of(eqs);
  r.signature = model.signature_of(fault_ranks_of_equations(model, eqs));
  r.redundancy = redundancy_ranks(model, eqs);
  return r;
}

class RgSearch {
 public:
  RgSearch(const StructuralModel& model, const TestabilityOperator& op,
           std::size_t oracle_bound)
      : model_(model), op_(op), bound_(oracle_bound) {}

  void run() {
    const IndexSet root = mstar_ranks(model_, model_.all_ranks(), op_, bound_);
    if (fault_ranks_of_equations(model_, root).empty()) return;
    found_.insert(root);
    expand(root);
  }

  std::vector<RgResult> results() const {
    std::vector<RgResult> out;
    for (const auto& s : found_) out.push_back(make_result(model_, s));
    sort_canonical(out);
    return out;
  }

 private:
  // Removes each fault-carrying equation in turn and keeps the largest
  // testable remainder whenever it still carries a fault.
  void expand(const IndexSet& m) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (model_.structure(m[i]).faults.empty()) continue;
      IndexSet rest = m;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      IndexSet next = mstar_ranks(model_, rest, op_, bound_);
      if (fault_ranks_of_equations(model_, next).empty()) continue;
      // A set seen before has already been expanded.
      if (!found_.insert(next).second) continue;
      expand(next);
    }
  }

  const StructuralModel& model_;
  const TestabilityOperator& op_;
  std::size_t bound_;
  std::set<IndexSet> found_;
};

}  // namespace

std::vector<EquationSet> find_msos(const StructuralModel& model, const EquationSet& subset) {
  std::set<IndexSet> visited;
  std::set<IndexSet> msos;
  std::vector<IndexSet> stack;
  IndexSet root = overdetermined_ranks(model, model.ranks_of(subset));
  if (!root.empty()) stack.push_back(std::move(root));
  while (!stack.empty()) {
    IndexSet m = std::move(stack.back());
    stack.pop_back();
    if (!visited.insert(m).second) continue;
    if (redundancy_ranks(model, m) == 1) {
      msos.insert(m);
      continue;
    }
    for (std::size_t i = 0; i < m.size(); ++i) {
      IndexSet rest = m;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      IndexSet next = overdetermined_ranks(model, rest);
      if (!next.empty() && !visited.count(next)) stack.push_back(std::move(next));
    }
  }
  std::vector<EquationSet> out;
  for (const auto& m : msos) out.push_back(model.set_of(m));
  sort_canonical(out);
  return out;
}

std::vector<EquationSet> brute_force_msos(const StructuralModel& model,
                                          const EquationSet& subset, std::size_t bound) {
  const IndexSet eqs = overdetermined_ranks(model, model.ranks_of(subset));
  check_bound(eqs.size(), bound);
  const std::size_t n = eqs.size();
  const unsigned long long count = 1ULL << n;
  std::vector<char> pso(count, 0);
  for (unsigned long long mask = 1; mask < count; ++mask)
    pso[mask] = is_pso_ranks(model, ranks_from_mask(eqs, mask)) ? 1 : 0;
  // has_pso[mask]: some PSO set is a subset of mask.
  std::vector<char> has_pso = pso;
  for (std::size_t i = 0; i < n; ++i)
    for (unsigned long long mask = 0; mask < count; ++mask)
      if (mask >> i & 1ULL) has_pso[mask] |= has_pso[mask & ~(1ULL << i)];
  std::vector<EquationSet> out;
  for (unsigned long long mask = 1; mask < count; ++mask) {
    if (!pso[mask]) continue;
    bool minimal = true;
    for (std::size_t i = 0; i < n && minimal; ++i)
      if (mask >> i & 1ULL) minimal = !has_pso[mask & ~(1ULL << i)];
    if (minimal) out.push_back(model.set_of(ranks_from_mask(eqs, mask)));
  }
  sort_canonical(out);
  return out;
}

std::vector<RgResult> find_rg(const StructuralModel& model, const TestabilityOperator& op,
                              std::size_t oracle_bound) {
  RgSearch search(model, op, oracle_bound);
  search.run();
  return search.results();
}

std::vector<RgResult> find_tes(const StructuralModel& model) {
  return find_rg(model, plus_operator());
}

std::vector<EquationSet> find_mtes(const StructuralModel& model) {
  const auto tes = find_tes(model);
  std::vector<EquationSet> out;
  for (const auto& t : tes) {
    const bool minimal = std::none_of(tes.begin(), tes.end(), [&](const RgResult& other) {
      return other.set != t.set && other.set.is_subset_of(t.set);
    });
    if (minimal) out.push_back(t.set);
  }
  sort_canonical(out);
  return out;
}

std::vector<RgResult> find_irg(std::vector<RgResult> results) {
  std::set<FaultSignature> seen;
  for (const auto& r : results) {
    if (!seen.insert(r.signature).second)
      throw PreconditionError("inconsistent collection: duplicate signature " +
                              r.signature.to_string());
  }
  std::vector<FaultSignature> basis;
  for (auto& r : results) {
    FaultSignature covered;
    for (const auto& other : results) {
      if (other.signature != r.signature && other.signature.is_subset_of(r.signature))
        covered = covered | other.signature;
    }
    r.irreducible = covered != r.signature;
    if (r.irreducible) basis.push_back(r.signature);
  }
  std::vector<FaultSignature> all(seen.begin(), seen.end());
  if (!signatures_covered_by(all, basis))
    throw std::logic_error("irreducible signatures do not cover the collection");
  return results;
}

bool signatures_covered_by(const std::vector<FaultSignature>& signatures,
                           const std::vector<FaultSignature>& basis) {
  for (const auto& s : signatures) {
    FaultSignature u;
    for (const auto& b : basis)
      if (b.is_subset_of(s)) u = u | b;
    if (u != s) return false;
  }
  return true;
}

FaultSignature detectable_faults(const StructuralModel& model, const TestabilityOperator& op,
                                 std::size_t oracle_bound) {
  const IndexSet m = mstar_ranks(model, model.all_ranks(), op, oracle_bound);
  return model.signature_of(fault_ranks_of_equations(model, m));
}

IsolabilityVerdict isolability(const StructuralModel& model, const TestabilityOperator& op,
                               const FaultSignature& from_mode,
                               const FaultSignature& wrt_mode, std::size_t oracle_bound) {
  if (from_mode.empty() || wrt_mode.empty())
    throw PreconditionError("fault modes must be nonempty");
  const IndexSet from = model.fault_ranks_of(from_mode);
  const IndexSet wrt = model.fault_ranks_of(wrt_mode);

  IndexSet removed;
  for (std::size_t f : wrt) removed.push_back(model.fault_home_rank(f));
  std::sort(removed.begin(), removed.end());
  IndexSet rest;
  const IndexSet all = model.all_ranks();
  std::set_difference(all.begin(), all.end(), removed.begin(), removed.end(),
                      std::back_inserter(rest));
  const IndexSet m = mstar_ranks(model, rest, op, oracle_bound);

  IsolabilityVerdict v{from_mode, wrt_mode, false, std::nullopt};
  for (std::size_t f : from) {
    const std::size_t home = model.fault_home_rank(f);
    if (std::binary_search(m.begin(), m.end(), home)) {
      v.isolable = true;
      v.witness = model.equation_id(home);
      break;
    }
  }
  return v;
}

std::vector<IsolabilityVerdict> isolability_matrix(const StructuralModel& model,
                                                   const TestabilityOperator& op,
                                                   std::size_t oracle_bound) {
  std::vector<IsolabilityVerdict> out;
  for (std::size_t i = 0; i < model.fault_count(); ++i)
    for (std::size_t j = 0; j < model.fault_count(); ++j)
      out.push_back(isolability(model, op, FaultSignature{model.fault_id(i)},
                                FaultSignature{model.fault_id(j)}, oracle_bound));
  return out;
}

RgOracleResult brute_force_rg(const StructuralModel& model, const TestabilityOperator& op,
                              std::size_t bound) {
  const IndexSet eqs = model.all_ranks();
  check_bound(eqs.size(), bound);
  std::map<IndexSet, unsigned long long> groups;  // signature ranks -> union mask
  const unsigned long long count = 1ULL << eqs.size();
  for (unsigned long long mask = 1; mask < count; ++mask) {
    const IndexSet s = ranks_from_mask(eqs, mask);
    IndexSet sig = fault_ranks_of_equations(model, s);
    if (sig.empty()) continue;
    if (!is_pso_ranks(model, s) || !op.holds(model, s)) continue;
    groups[std::move(sig)] |= mask;
  }
  RgOracleResult out;
  for (const auto& [sig, mask] : groups) {
    const IndexSet u = ranks_from_mask(eqs, mask);
    const EquationSet set = model.set_of(u);
    if (!is_pso_ranks(model, u)) {
      out.violations.push_back("union for signature " + model.signature_of(sig).to_string() +
                               " is not PSO: " + set.to_string());
      continue;
    }
    if (!op.holds(model, u)) {
      out.violations.push_back("union for signature " + model.signature_of(sig).to_string() +
                               " is not testable: " + set.to_string());
      continue;
    }
    if (fault_ranks_of_equations(model, u) != sig) {
      out.violations.push_back("union for signature " + model.signature_of(sig).to_string() +
                               " changes the signature: " + set.to_string());
      continue;
    }
    out.results.push_back(make_result(model, u));
  }
  sort_canonical(out.results);
  return out;
}

}  // namespace structdiag
