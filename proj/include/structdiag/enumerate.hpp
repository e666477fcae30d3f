#pragma once

/// @file enumerate.hpp
/// Enumeration of redundant submodels: MSO sets, RG sets (the largest
/// testable PSO set per fault signature), TES/MTES as the RG sets of the
/// `plus` operator, irreducible signatures, and structural
/// detectability/isolability. Brute-force counterparts are provided for
/// cross-checking on small models.
///
/// Every collection is returned in canonical order: by set size, then ids.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "structdiag/id_set.hpp"
#include "structdiag/model.hpp"
#include "structdiag/operators.hpp"

namespace structdiag {

struct RgResult {
  EquationSet set;
  FaultSignature signature;
  bool irreducible = false;
  std::size_t redundancy = 0;

  friend bool operator==(const RgResult&, const RgResult&) = default;
};

/// All MSO subsets of subset+.
std::vector<EquationSet> find_msos(const StructuralModel& model, const EquationSet& subset);

/// MSO sets by exhaustive enumeration of subset+ (bounded).
std::vector<EquationSet> brute_force_msos(const StructuralModel& model,
                                          const EquationSet& subset,
                                          std::size_t bound = kDefaultOracleBound);

/// All RG sets of the model under `op`. Irreducibility flags are left unset;
/// pass the result through find_irg to fill them.
std::vector<RgResult> find_rg(const StructuralModel& model, const TestabilityOperator& op,
                              std::size_t oracle_bound = kDefaultOracleBound);

/// TESs: the RG sets of the `plus` operator.
std::vector<RgResult> find_tes(const StructuralModel& model);

/// Inclusion-minimal TESs.
std::vector<EquationSet> find_mtes(const StructuralModel& model);

/// Marks each result irreducible when its signature is not a union of the
/// other signatures in the collection. Throws PreconditionError
/// ("inconsistent collection") on duplicate signatures.
std::vector<RgResult> find_irg(std::vector<RgResult> results);

/// True when every signature in `signatures` equals the union of the members
/// of `basis` it contains.
bool signatures_covered_by(const std::vector<FaultSignature>& signatures,
                           const std::vector<FaultSignature>& basis);

/// Faults of M*(model).
FaultSignature detectable_faults(const StructuralModel& model, const TestabilityOperator& op,
                                 std::size_t oracle_bound = kDefaultOracleBound);

struct IsolabilityVerdict {
  FaultSignature from_mode;
  FaultSignature wrt_mode;
  bool isolable = false;
  std::optional<std::string> witness;  ///< home equation of a from-mode fault

  friend bool operator==(const IsolabilityVerdict&, const IsolabilityVerdict&) = default;
};

/// Whether `from_mode` is isolable from `wrt_mode`: some fault of the former
/// has its home equation in M*(model minus the home equations of the
/// latter). Throws PreconditionError for empty modes, UnknownIdError for
/// unknown faults.
IsolabilityVerdict isolability(const StructuralModel& model, const TestabilityOperator& op,
                               const FaultSignature& from_mode,
                               const FaultSignature& wrt_mode,
                               std::size_t oracle_bound = kDefaultOracleBound);

/// Verdicts for every ordered pair of single faults, row-major in canonical
/// fault order (diagonal included).
std::vector<IsolabilityVerdict> isolability_matrix(const StructuralModel& model,
                                                   const TestabilityOperator& op,
                                                   std::size_t oracle_bound = kDefaultOracleBound);

struct RgOracleResult {
  std::vector<RgResult> results;
  std::vector<std::string> violations;
};

/// RG sets by exhaustion: every testable PSO subset with a nonempty
/// signature, grouped by signature, each group replaced by its union.
RgOracleResult brute_force_rg(const StructuralModel& model, const TestabilityOperator& op,
                              std::size_t bound = kDefaultOracleBound);

}  // namespace structdiag
