#pragma once

/// @file operators.hpp
/// Testability predicates and the M* operator: the largest PSO subset of a
/// set that satisfies a residual-generation method's structural condition.
///
/// Three operators are built in:
///  - `plus`:     every PSO set is testable, so M* = M+.
///  - `backsub`:  unknowns must be computable by sequential back-substitution,
///                one equation with a single uncomputed unknown at a time.
///  - `lowindex`: the set, read as a semi-explicit DAE, has low structural
///                index: its purely algebraic unknowns can be matched into the
///                non-differential equations.
///
/// Further operators can be registered. An operator that supplies a
/// blocked-unknowns function gets the fixed-point M*; one that does not is
/// evaluated by exhaustive enumeration, within the oracle bound.

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "structdiag/id_set.hpp"
#include "structdiag/model.hpp"

namespace structdiag {

inline constexpr std::size_t kDefaultOracleBound = 16;

class TestabilityOperator {
 public:
  /// Predicate on a PSO set, given as sorted equation ranks.
  using Predicate = std::function<bool(const StructuralModel&, const IndexSet&)>;
  /// For a PSO set failing the predicate: unknown ranks that no testable
  /// subset can contain. Must be nonempty whenever the predicate fails.
  using BlockedUnknowns =
      std::function<IndexSet(const StructuralModel&, const IndexSet&)>;

  TestabilityOperator(std::string name, Predicate predicate,
                      BlockedUnknowns blocked = {});

  const std::string& name() const noexcept { return name_; }
  bool has_fixed_point() const noexcept { return static_cast<bool>(blocked_); }
  bool holds(const StructuralModel& model, const IndexSet& pso_set) const {
    return predicate_(model, pso_set);
  }
  IndexSet blocked(const StructuralModel& model, const IndexSet& pso_set) const;

 private:
  std::string name_;
  Predicate predicate_;
  BlockedUnknowns blocked_;
};

const TestabilityOperator& plus_operator();
const TestabilityOperator& backsub_operator();
const TestabilityOperator& lowindex_operator();

/// Name -> operator lookup. Fill once, then share read-only.
class OperatorRegistry {
 public:
  /// Throws InputError if the name is taken.
  void add(TestabilityOperator op);
  const TestabilityOperator& get(std::string_view name) const;
  bool contains(std::string_view name) const;
  std::vector<std::string> names() const;

  /// Registry holding plus, backsub and lowindex.
  static const OperatorRegistry& builtin();

 private:
  std::map<std::string, TestabilityOperator, std::less<>> ops_;
};

/// Looks up a built-in operator; throws UnknownIdError.
const TestabilityOperator& operator_by_name(std::string_view name);

/// Throws PreconditionError("not a PSO set") unless `subset` is PSO.
bool testable(const StructuralModel& model, const EquationSet& subset,
              const TestabilityOperator& op);

struct ComputationOrder {
  std::vector<std::pair<std::string, std::string>> pivots;  ///< (equation, unknown)
  EquationSet residual_equations;
};

/// Back-substitution sequence for a PSO, backsub-testable set. When several
/// equations are eligible, the canonically greatest is used, so the lowest
/// ids are left over as residual equations. Throws PreconditionError if the
/// set is not PSO or not back-substitution computable.
ComputationOrder computation_order(const StructuralModel& model,
                                   const EquationSet& subset);

/// Largest testable PSO subset of `subset` (possibly empty).
EquationSet mstar(const StructuralModel& model, const EquationSet& subset,
                  const TestabilityOperator& op,
                  std::size_t oracle_bound = kDefaultOracleBound);

struct MstarOracleResult {
  EquationSet set;                      ///< union of all testable PSO subsets
  std::vector<std::string> violations;  ///< union-closure failures, if any
};

/// Union of every testable PSO subset found by exhaustive enumeration, with
/// a check that the union is itself PSO and testable. Throws
/// OracleBoundError when |subset| exceeds `bound`.
MstarOracleResult brute_force_mstar(const StructuralModel& model,
                                    const EquationSet& subset,
                                    const TestabilityOperator& op,
                                    std::size_t bound = kDefaultOracleBound);

// Rank-level variants.
IndexSet mstar_ranks(const StructuralModel& model, const IndexSet& eqs,
                     const TestabilityOperator& op,
                     std::size_t oracle_bound = kDefaultOracleBound);
bool testable_ranks(const StructuralModel& model, const IndexSet& eqs,
                    const TestabilityOperator& op);

}  // namespace structdiag
