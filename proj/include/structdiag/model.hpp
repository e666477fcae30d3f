#pragma once

/// @file model.hpp
/// Structural models: equations over unknown variables, known signals and
/// fault labels, together with the JSON model file format.
///
/// Only the incidence structure of each equation is kept. An unknown may
/// occur algebraically, differentiated, or both within one equation; the
/// bipartite graph merges the two occurrence kinds while the semi-explicit
/// classification distinguishes them.
///
/// Internally every equation, unknown and fault also has a *rank*: its
/// position in lexicographic id order. Algorithms work on sorted rank
/// vectors (IndexSet), which map one-to-one onto the canonical IdSet form.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "structdiag/id_set.hpp"

namespace structdiag {

enum class Occurrence { algebraic, differentiated };

enum class VariableKind { unknown, known, fault };

struct Incidence {
  std::string variable;
  Occurrence occurrence = Occurrence::algebraic;

  friend bool operator==(const Incidence&, const Incidence&) = default;
};

struct Equation {
  std::string id;
  std::vector<Incidence> incidences;  ///< over unknowns only
  std::vector<std::string> knowns;
  std::vector<std::string> faults;

  bool is_differential() const;
  friend bool operator==(const Equation&, const Equation&) = default;
};

/// Sorted vector of ranks into one of the model's id registries.
using IndexSet = std::vector<std::size_t>;

/// Rank-level view of one equation, precomputed at model construction.
struct EquationStructure {
  IndexSet unknowns;   ///< any occurrence kind
  IndexSet algebraic;  ///< unknowns with an algebraic occurrence
  std::optional<std::size_t> differentiated;
  IndexSet faults;
};

/// Immutable, validated structural model.
class StructuralModel {
 public:
  /// Validates and builds a model. Throws InputError on any violated
  /// invariant: duplicate ids, undeclared references, a fault missing from
  /// every equation or present in more than one, an unused unknown, or more
  /// than one differentiated incidence in an equation.
  StructuralModel(std::string name, std::vector<std::string> unknowns,
                  std::vector<std::string> knowns,
                  std::vector<std::string> faults,
                  std::vector<Equation> equations);

  const std::string& name() const noexcept { return name_; }

  /// Equations in file order.
  const std::vector<Equation>& equations() const noexcept { return equations_; }
  const std::vector<std::string>& unknown_ids() const noexcept { return unknowns_; }
  const std::vector<std::string>& known_ids() const noexcept { return knowns_; }
  const std::vector<std::string>& fault_ids() const noexcept { return faults_; }

  std::size_t equation_count() const noexcept { return equations_.size(); }

  const Equation& equation(std::string_view id) const;
  bool has_equation(std::string_view id) const;
  bool has_fault(std::string_view id) const;

  /// The single equation a fault enters.
  const std::string& fault_home(std::string_view fault) const;

  EquationSet all_equations() const;
  VariableSet unknowns_of(const EquationSet& subset) const;

  // Rank-level access. Equation, unknown and fault ranks follow
  // lexicographic id order.
  IndexSet ranks_of(const EquationSet& subset) const;
  IndexSet fault_ranks_of(const FaultSignature& faults) const;
  IndexSet all_ranks() const;
  EquationSet set_of(std::span<const std::size_t> ranks) const;
  VariableSet variables_of(std::span<const std::size_t> unknown_ranks) const;
  FaultSignature signature_of(std::span<const std::size_t> fault_ranks) const;
  const EquationStructure& structure(std::size_t rank) const {
    return structure_[rank];
  }
  const std::string& equation_id(std::size_t rank) const {
    return equations_[by_rank_[rank]].id;
  }
  const std::string& unknown_id(std::size_t rank) const { return sorted_unknowns_[rank]; }
  const std::string& fault_id(std::size_t rank) const { return sorted_faults_[rank]; }
  std::size_t unknown_count() const noexcept { return unknowns_.size(); }
  std::size_t fault_count() const noexcept { return faults_.size(); }
  /// Rank of the equation hosting the fault of the given rank.
  std::size_t fault_home_rank(std::size_t fault_rank) const {
    return fault_home_[fault_rank];
  }

  friend bool operator==(const StructuralModel& a, const StructuralModel& b);

 private:
  std::string name_;
  std::vector<std::string> unknowns_;
  std::vector<std::string> knowns_;
  std::vector<std::string> faults_;
  std::vector<Equation> equations_;

  std::vector<std::string> sorted_unknowns_;
  std::vector<std::string> sorted_faults_;
  std::vector<std::size_t> by_rank_;  // equation rank -> file position
  std::map<std::string, std::size_t, std::less<>> rank_of_equation_;
  std::vector<EquationStructure> structure_;
  std::vector<std::size_t> fault_home_;  // fault rank -> equation rank
};

/// Parses the JSON model file format. Any "linear" block is ignored here;
/// see linres.hpp. Throws ParseError on malformed JSON and InputError on
/// schema or model-invariant violations.
StructuralModel parse_model(std::string_view text);

/// Reads and parses a model file.
StructuralModel load_model(const std::string& path);

/// Canonical JSON rendering; parse_model(serialize_model(m)) == m.
std::string serialize_model(const StructuralModel& model);

/// Union of fault labels over the subset's equations (possibly empty).
FaultSignature faults_of(const StructuralModel& model, const EquationSet& subset);

/// Home equations of the given faults.
EquationSet equations_of_faults(const StructuralModel& model,
                                const FaultSignature& modes);

struct SemiExplicitPartition {
  EquationSet differential;
  EquationSet non_differential;
  VariableSet x1;  ///< unknowns differentiated in some member
  VariableSet x2;  ///< remaining unknowns of the subset

  friend bool operator==(const SemiExplicitPartition&,
                         const SemiExplicitPartition&) = default;
};

/// Splits a subset into semi-explicit DAE form relative to that subset.
SemiExplicitPartition classify_semi_explicit(const StructuralModel& model,
                                             const EquationSet& subset);

// Rank-level helpers shared by the algorithm modules.
IndexSet unknown_ranks_of(const StructuralModel& model,
                          std::span<const std::size_t> eqs);
IndexSet fault_ranks_of_equations(const StructuralModel& model,
                                  std::span<const std::size_t> eqs);

/// Parses "a,b,c" into trimmed, nonempty ids.
std::vector<std::string> split_id_list(std::string_view list);

}  // namespace structdiag
