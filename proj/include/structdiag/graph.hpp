#pragma once

/// @file graph.hpp
/// Bipartite equation/unknown structure, maximum matching, and the coarse
/// Dulmage-Mendelsohn decomposition into over-, exactly and underdetermined
/// parts.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "structdiag/id_set.hpp"
#include "structdiag/model.hpp"

namespace structdiag {

/// Rows are equations, columns are unknowns. Adjacency is stored per row as
/// sorted column positions, which makes the matching deterministic.
class BipartiteStructure {
 public:
  BipartiteStructure() = default;
  BipartiteStructure(std::vector<std::string> rows, std::vector<std::string> cols);

  /// Adds edge (row, col) by position; duplicates collapse.
  void add_edge(std::size_t row, std::size_t col);
  /// Adds edge by id; throws UnknownIdError for ids not in rows/cols.
  void add_edge(const std::string& row, const std::string& col);

  const std::vector<std::string>& rows() const noexcept { return rows_; }
  const std::vector<std::string>& cols() const noexcept { return cols_; }
  const std::vector<std::size_t>& neighbors(std::size_t row) const { return adj_[row]; }
  bool has_edge(std::size_t row, std::size_t col) const;
  std::size_t edge_count() const;
  std::vector<std::pair<std::string, std::string>> edges() const;

 private:
  std::vector<std::string> rows_;
  std::vector<std::string> cols_;
  std::vector<std::vector<std::size_t>> adj_;
};

/// Graph of the equations in `subset` against the unknowns they contain.
/// Algebraic and differentiated occurrences give one merged edge.
BipartiteStructure bipartite_of(const StructuralModel& model, const EquationSet& subset);

inline constexpr std::size_t kUnmatched = static_cast<std::size_t>(-1);

struct MatchingResult {
  std::vector<std::size_t> row_match;  ///< column per row, or kUnmatched
  std::vector<std::size_t> col_match;  ///< row per column, or kUnmatched
  std::size_t size = 0;

  /// Matched (row id, col id) pairs in row order.
  std::vector<std::pair<std::string, std::string>> pairs(
      const BipartiteStructure& g) const;
};

/// Maximum-cardinality matching by augmenting paths, rows and columns
/// visited in stored order.
MatchingResult maximum_matching(const BipartiteStructure& g);

/// Coarse decomposition of a graph in row/column positions.
struct DmParts {
  std::vector<std::size_t> rows_plus, rows_zero, rows_minus;
  std::vector<std::size_t> cols_plus, cols_zero, cols_minus;
  MatchingResult matching;
};

DmParts dm_parts(const BipartiteStructure& g);

struct DmResult {
  EquationSet m_plus, m_zero, m_minus;
  VariableSet x_plus, x_zero, x_minus;
  std::vector<std::pair<std::string, std::string>> matching;
};

DmResult dm_decompose(const StructuralModel& model, const EquationSet& subset);

/// M+: the largest PSO subset of `subset` (empty if none).
EquationSet overdetermined_part(const StructuralModel& model, const EquationSet& subset);

/// |subset| - |unknowns(subset)| for a PSO (or empty) subset. Throws
/// PreconditionError("not a PSO set") otherwise.
std::size_t redundancy(const StructuralModel& model, const EquationSet& subset);

enum class PsoClass { not_pso, pso, mso };

const char* to_string(PsoClass c);

/// Classifies a subset. MSO membership is decided both by redundancy one and
/// by minimality (every one-equation removal has an empty M+); the two must
/// agree or std::logic_error is thrown.
PsoClass classify_pso(const StructuralModel& model, const EquationSet& subset);

/// Text grid with X marks, one line per row; columns in stored order.
std::string render_biadjacency(const BipartiteStructure& g);

// Rank-level variants used by the operator and enumeration modules. All
// inputs and outputs are sorted equation ranks.
IndexSet overdetermined_ranks(const StructuralModel& model, const IndexSet& eqs);
bool is_pso_ranks(const StructuralModel& model, const IndexSet& eqs);
std::size_t redundancy_ranks(const StructuralModel& model, const IndexSet& eqs);

}  // namespace structdiag
