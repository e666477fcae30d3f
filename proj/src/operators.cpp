#include "structdiag/operators.hpp"

#include <algorithm>
#include <stdexcept>

#include "structdiag/error.hpp"
#include "structdiag/graph.hpp"

namespace structdiag {

namespace {

struct Pivot {
  std::size_t equation;
  std::size_t unknown;
};

// Greedy back-substitution over sorted equation ranks. Among eligible
// equations the greatest rank is taken first.
std::vector<Pivot> backsub_sequence(const StructuralModel& model, const IndexSet& eqs) {
  std::vector<char> computed(model.unknown_count(), 0);
  std::vector<char> used(eqs.size(), 0);
  std::vector<Pivot> seq;
  for (;;) {
    bool progressed = false;
    for (std::size_t i = eqs.size(); i-- > 0;) {
      if (used[i]) continue;
      std::size_t open = 0, last = 0;
      for (std::size_t u : model.structure(eqs[i]).unknowns) {
        if (!computed[u]) {
          ++open;
          last = u;
        }
      }
      if (open == 1) {
        computed[last] = 1;
        used[i] = 1;
        seq.push_back({eqs[i], last});
        progressed = true;
        break;
      }
    }
    if (!progressed) break;
  }
  return seq;
}

IndexSet backsub_blocked(const StructuralModel& model, const IndexSet& eqs) {
  IndexSet done;
  for (const auto& p : backsub_sequence(model, eqs)) done.push_back(p.unknown);
  std::sort(done.begin(), done.end());
  const IndexSet all = unknown_ranks_of(model, eqs);
  IndexSet blocked;
  std::set_difference(all.begin(), all.end(), done.begin(), done.end(),
                      std::back_inserter(blocked));
  return blocked;
}

bool backsub_holds(const StructuralModel& model, const IndexSet& eqs) {
  return backsub_blocked(model, eqs).empty();
}

// Graph of the non-differential equations of `eqs` against the unknowns that
// no member differentiates (X2), using algebraic occurrences only.
struct AlgebraicBlock {
  BipartiteStructure graph;
  IndexSet x2;
};

AlgebraicBlock algebraic_block(const StructuralModel& model, const IndexSet& eqs) {
  std::vector<char> differentiated(model.unknown_count(), 0);
  IndexSet non_diff;
  for (std::size_t e : eqs) {
    const auto& st = model.structure(e);
    if (st.differentiated) differentiated[*st.differentiated] = 1;
    else non_diff.push_back(e);
  }
  AlgebraicBlock block;
  std::vector<std::size_t> local(model.unknown_count(), kUnmatched);
  std::vector<std::string> cols;
  for (std::size_t u : unknown_ranks_of(model, eqs)) {
    if (differentiated[u]) continue;
    local[u] = block.x2.size();
    block.x2.push_back(u);
    cols.push_back(model.unknown_id(u));
  }
  std::vector<std::string> rows;
  for (std::size_t e : non_diff) rows.push_back(model.equation_id(e));
  block.graph = BipartiteStructure(std::move(rows), std::move(cols));
  for (std::size_t r = 0; r < non_diff.size(); ++r)
    for (std::size_t u : model.structure(non_diff[r]).algebraic)
      if (local[u] != kUnmatched) block.graph.add_edge(r, local[u]);
  return block;
}

bool lowindex_holds(const StructuralModel& model, const IndexSet& eqs) {
  const AlgebraicBlock block = algebraic_block(model, eqs);
  return maximum_matching(block.graph).size == block.x2.size();
}

// X2 unknowns in the underdetermined part of the algebraic block: no subset
// can match them, since every equation reaching them lies in that part.
IndexSet lowindex_blocked(const StructuralModel& model, const IndexSet& eqs) {
  const AlgebraicBlock block = algebraic_block(model, eqs);
  const DmParts parts = dm_parts(block.graph);
  IndexSet blocked;
  for (std::size_t c : parts.cols_minus) blocked.push_back(block.x2[c]);
  std::sort(blocked.begin(), blocked.end());
  return blocked;
}

IndexSet ranks_from_mask(const IndexSet& eqs, unsigned long long mask) {
  IndexSet out;
  for (std::size_t i = 0; i < eqs.size(); ++i)
    if (mask >> i & 1ULL) out.push_back(eqs[i]);
  return out;
}

}  // namespace

TestabilityOperator::TestabilityOperator(std::string name, Predicate predicate,
                                         BlockedUnknowns blocked)
    : name_(std::move(name)), predicate_(std::move(predicate)), blocked_(std::move(blocked)) {
  if (!predicate_) throw std::invalid_argument("operator '" + name_ + "' has no predicate");
}

IndexSet TestabilityOperator::blocked(const StructuralModel& model,
                                      const IndexSet& pso_set) const {
  if (!blocked_) throw std::logic_error("operator '" + name_ + "' has no fixed point");
  return blocked_(model, pso_set);
}

const TestabilityOperator& plus_operator() {
  static const TestabilityOperator op(
      "plus", [](const StructuralModel&, const IndexSet&) { return true; },
      [](const StructuralModel&, const IndexSet&) { return IndexSet{}; });
  return op;
}

const TestabilityOperator& backsub_operator() {
  static const TestabilityOperator op("backsub", backsub_holds, backsub_blocked);
  return op;
}

const TestabilityOperator& lowindex_operator() {
  static const TestabilityOperator op("lowindex", lowindex_holds, lowindex_blocked);
  return op;
}

void OperatorRegistry::add(TestabilityOperator op) {
  std::string name = op.name();
  if (!ops_.emplace(name, std::move(op)).second)
    throw InputError("operator '" + name + "' already registered");
}

const TestabilityOperator& OperatorRegistry::get(std::string_view name) const {
  auto it = ops_.find(name);
  if (it == ops_.end()) throw UnknownIdError("unknown operator '" + std::string(name) + "'");
  return it->second;
}

bool OperatorRegistry::contains(std::string_view name) const {
  return ops_.find(name) != ops_.end();
}

std::vector<std::string> OperatorRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, op] : ops_) out.push_back(name);
  return out;
}

const OperatorRegistry& OperatorRegistry::builtin() {
  static const OperatorRegistry registry = [] {
    OperatorRegistry r;
    r.add(plus_operator());
    r.add(backsub_operator());
    r.add(lowindex_operator());
    return r;
  }();
  return registry;
}

const TestabilityOperator& operator_by_name(std::string_view name) {
  return OperatorRegistry::builtin().get(name);
}

bool testable_ranks(const StructuralModel& model, const IndexSet& eqs,
                    const TestabilityOperator& op) {
  if (!is_pso_ranks(model, eqs))
    throw PreconditionError("not a PSO set: " + model.set_of(eqs).to_string());
  return op.holds(model, eqs);
}

bool testable(const StructuralModel& model, const EquationSet& subset,
              const TestabilityOperator& op) {
  return testable_ranks(model, model.ranks_of(subset), op);
}

ComputationOrder computation_order(const StructuralModel& model,
                                   const EquationSet& subset) {
  const IndexSet eqs = model.ranks_of(subset);
  if (!is_pso_ranks(model, eqs))
    throw PreconditionError("not a PSO set: " + subset.to_string());
  const auto seq = backsub_sequence(model, eqs);
  if (seq.size() != unknown_ranks_of(model, eqs).size())
    throw PreconditionError("not back-substitution computable: " + subset.to_string());
  ComputationOrder order;
  IndexSet pivot_eqs;
  for (const auto& p : seq) {
    order.pivots.emplace_back(model.equation_id(p.equation), model.unknown_id(p.unknown));
    pivot_eqs.push_back(p.equation);
  }
  std::sort(pivot_eqs.begin(), pivot_eqs.end());
  IndexSet rest;
  std::set_difference(eqs.begin(), eqs.end(), pivot_eqs.begin(), pivot_eqs.end(),
                      std::back_inserter(rest));
  order.residual_equations = model.set_of(rest);
  return order;
}

MstarOracleResult brute_force_mstar(const StructuralModel& model,
                                    const EquationSet& subset,
                                    const TestabilityOperator& op, std::size_t bound) {
  const IndexSet eqs = model.ranks_of(subset);
  if (eqs.size() > bound || eqs.size() >= 63)
    throw OracleBoundError("oracle bound exceeded: " + std::to_string(eqs.size()) +
                           " equations > " + std::to_string(bound));
  const unsigned long long full = (1ULL << eqs.size()) - 1;
  unsigned long long united = 0;
  for (unsigned long long mask = 1; mask <= full && full; ++mask) {
    // Subsets of the running union cannot change it.
    if ((mask & ~united) == 0) continue;
    const IndexSet s = ranks_from_mask(eqs, mask);
    if (is_pso_ranks(model, s) && op.holds(model, s)) united |= mask;
  }
  MstarOracleResult result;
  const IndexSet u = ranks_from_mask(eqs, united);
  result.set = model.set_of(u);
  if (!u.empty()) {
    if (!is_pso_ranks(model, u))
      result.violations.push_back("union of testable PSO sets is not PSO: " +
                                  result.set.to_string());
    else if (!op.holds(model, u))
      result.violations.push_back("union of testable PSO sets is not testable under '" +
                                  op.name() + "': " + result.set.to_string());
  }
  return result;
}

IndexSet mstar_ranks(const StructuralModel& model, const IndexSet& eqs,
                     const TestabilityOperator& op, std::size_t oracle_bound) {
  if (!op.has_fixed_point()) {
    auto oracle = brute_force_mstar(model, model.set_of(eqs), op, oracle_bound);
    if (!oracle.violations.empty())
      throw PreconditionError("operator '" + op.name() +
                              "' has no largest testable subset here: " +
                              oracle.violations.front());
    return model.ranks_of(oracle.set);
  }
  IndexSet current = overdetermined_ranks(model, eqs);
  while (!current.empty()) {
    if (op.holds(model, current)) return current;
    const IndexSet blocked = op.blocked(model, current);
    if (blocked.empty())
      throw std::logic_error("operator '" + op.name() +
                             "' rejects a set but blocks no unknown");
    IndexSet kept;
    for (std::size_t e : current) {
      const auto& u = model.structure(e).unknowns;
      const bool touches = std::any_of(u.begin(), u.end(), [&](std::size_t x) {
        return std::binary_search(blocked.begin(), blocked.end(), x);
      });
      if (!touches) kept.push_back(e);
    }
    if (kept.size() == current.size())
      throw std::logic_error("operator '" + op.name() +
                             "' blocks unknowns outside the set");
    current = overdetermined_ranks(model, kept);
  }
  return current;
}

EquationSet mstar(const StructuralModel& model, const EquationSet& subset,
                  const TestabilityOperator& op, std::size_t oracle_bound) {
  return model.set_of(mstar_ranks(model, model.ranks_of(subset), op, oracle_bound));
}

}  // namespace structdiag
