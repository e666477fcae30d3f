#include "structdiag/graph.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>

#include "structdiag/error.hpp"

namespace structdiag {

BipartiteStructure::BipartiteStructure(std::vector<std::string> rows,
                                       std::vector<std::string> cols)
    : rows_(std::move(rows)), cols_(std::move(cols)), adj_(rows_.size()) {}

void BipartiteStructure::add_edge(std::size_t row, std::size_t col) {
  auto& a = adj_.at(row);
  if (col >= cols_.size()) throw std::out_of_range("column position out of range");
  auto it = std::lower_bound(a.begin(), a.end(), col);
  if (it == a.end() || *it != col) a.insert(it, col);
}

void BipartiteStructure::add_edge(const std::string& row, const std::string& col) {
  auto r = std::find(rows_.begin(), rows_.end(), row);
  auto c = std::find(cols_.begin(), cols_.end(), col);
  if (r == rows_.end()) throw UnknownIdError("unknown row '" + row + "'");
  if (c == cols_.end()) throw UnknownIdError("unknown column '" + col + "'");
  add_edge(static_cast<std::size_t>(r - rows_.begin()),
           static_cast<std::size_t>(c - cols_.begin()));
}

bool BipartiteStructure::has_edge(std::size_t row, std::size_t col) const {
  const auto& a = adj_[row];
  return std::binary_search(a.begin(), a.end(), col);
}

std::size_t BipartiteStructure::edge_count() const {
  std::size_t n = 0;
  for (const auto& a : adj_) n += a.size();
  return n;
}

std::vector<std::pair<std::string, std::string>> BipartiteStructure::edges() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t r = 0; r < rows_.size(); ++r)
    for (std::size_t c : adj_[r]) out.emplace_back(rows_[r], cols_[c]);
  return out;
}

namespace {

BipartiteStructure graph_of_ranks(const StructuralModel& model, const IndexSet& eqs) {
  const IndexSet unknowns = unknown_ranks_of(model, eqs);
  std::vector<std::size_t> local(model.unknown_count(), kUnmatched);
  std::vector<std::string> rows, cols;
  for (std::size_t i = 0; i < unknowns.size(); ++i) {
    local[unknowns[i]] = i;
    cols.push_back(model.unknown_id(unknowns[i]));
  }
  for (std::size_t e : eqs) rows.push_back(model.equation_id(e));
  BipartiteStructure g(std::move(rows), std::move(cols));
  for (std::size_t r = 0; r < eqs.size(); ++r)
    for (std::size_t u : model.structure(eqs[r]).unknowns) g.add_edge(r, local[u]);
  return g;
}

// Kuhn's augmenting path search, iterative to keep stack use bounded.
bool augment(const BipartiteStructure& g, std::size_t root, MatchingResult& m,
             std::vector<char>& visited) {
  struct Frame {
    std::size_t row;
    std::size_t next;
  };
  std::vector<Frame> stack{{root, 0}};
  std::vector<std::size_t> via;  // column used to enter each deeper frame
  while (!stack.empty()) {
    Frame& f = stack.back();
    const auto& nb = g.neighbors(f.row);
    if (f.next == nb.size()) {
      stack.pop_back();
      if (!via.empty()) via.pop_back();
      continue;
    }
    std::size_t col = nb[f.next++];
    if (visited[col]) continue;
    visited[col] = 1;
    if (m.col_match[col] == kUnmatched) {
      // Flip the path: rows on the stack take the columns that led deeper.
      via.push_back(col);
      for (std::size_t i = stack.size(); i-- > 0;) {
        std::size_t r = stack[i].row;
        std::size_t c = via[i];
        m.row_match[r] = c;
        m.col_match[c] = r;
      }
      return true;
    }
    via.push_back(col);
    stack.push_back({m.col_match[col], 0});
  }
  return false;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> MatchingResult::pairs(
    const BipartiteStructure& g) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t r = 0; r < row_match.size(); ++r)
    if (row_match[r] != kUnmatched) out.emplace_back(g.rows()[r], g.cols()[row_match[r]]);
  return out;
}

MatchingResult maximum_matching(const BipartiteStructure& g) {
  MatchingResult m;
  m.row_match.assign(g.rows().size(), kUnmatched);
  m.col_match.assign(g.cols().size(), kUnmatched);
  std::vector<char> visited(g.cols().size());
  for (std::size_t r = 0; r < g.rows().size(); ++r) {
    std::fill(visited.begin(), visited.end(), 0);
    if (augment(g, r, m, visited)) ++m.size;
  }
  return m;
}

DmParts dm_parts(const BipartiteStructure& g) {
  DmParts parts;
  parts.matching = maximum_matching(g);
  const auto& m = parts.matching;
  const std::size_t nr = g.rows().size(), nc = g.cols().size();

  // Column -> rows adjacency for the search from unmatched columns.
  std::vector<std::vector<std::size_t>> col_adj(nc);
  for (std::size_t r = 0; r < nr; ++r)
    for (std::size_t c : g.neighbors(r)) col_adj[c].push_back(r);

  std::vector<char> row_minus(nr), col_minus(nc), row_plus(nr), col_plus(nc);

  // Underdetermined: alternating paths from unmatched columns
  // (column -> any row -> that row's matched column).
  std::deque<std::size_t> queue;
  for (std::size_t c = 0; c < nc; ++c)
    if (m.col_match[c] == kUnmatched) {
      col_minus[c] = 1;
      queue.push_back(c);
    }
  while (!queue.empty()) {
    std::size_t c = queue.front();
    queue.pop_front();
    for (std::size_t r : col_adj[c]) {
      if (row_minus[r]) continue;
      row_minus[r] = 1;
      std::size_t next = m.row_match[r];
      if (next != kUnmatched && !col_minus[next]) {
        col_minus[next] = 1;
        queue.push_back(next);
      }
    }
  }

  // Overdetermined: alternating paths from unmatched rows
  // (row -> any column -> that column's matched row).
  for (std::size_t r = 0; r < nr; ++r)
    if (m.row_match[r] == kUnmatched) {
      row_plus[r] = 1;
      queue.push_back(r);
    }
  while (!queue.empty()) {
    std::size_t r = queue.front();
    queue.pop_front();
    for (std::size_t c : g.neighbors(r)) {
      if (col_plus[c]) continue;
      col_plus[c] = 1;
      std::size_t next = m.col_match[c];
      if (next != kUnmatched && !row_plus[next]) {
        row_plus[next] = 1;
        queue.push_back(next);
      }
    }
  }

  for (std::size_t r = 0; r < nr; ++r) {
    if (row_plus[r]) parts.rows_plus.push_back(r);
    else if (row_minus[r]) parts.rows_minus.push_back(r);
    else parts.rows_zero.push_back(r);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    if (col_plus[c]) parts.cols_plus.push_back(c);
    else if (col_minus[c]) parts.cols_minus.push_back(c);
    else parts.cols_zero.push_back(c);
  }
  return parts;
}

BipartiteStructure bipartite_of(const StructuralModel& model, const EquationSet& subset) {
  return graph_of_ranks(model, model.ranks_of(subset));
}

DmResult dm_decompose(const StructuralModel& model, const EquationSet& subset) {
  const BipartiteStructure g = bipartite_of(model, subset);
  const DmParts p = dm_parts(g);
  auto rows = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> ids;
    for (std::size_t i : idx) ids.push_back(g.rows()[i]);
    return EquationSet(std::move(ids));
  };
  auto cols = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::string> ids;
    for (std::size_t i : idx) ids.push_back(g.cols()[i]);
    return VariableSet(std::move(ids));
  };
  return {rows(p.rows_plus),  rows(p.rows_zero),  rows(p.rows_minus),
          cols(p.cols_plus),  cols(p.cols_zero),  cols(p.cols_minus),
          p.matching.pairs(g)};
}

IndexSet overdetermined_ranks(const StructuralModel& model, const IndexSet& eqs) {
  if (eqs.empty()) return {};
  const BipartiteStructure g = graph_of_ranks(model, eqs);
  const DmParts p = dm_parts(g);
  IndexSet out;
  out.reserve(p.rows_plus.size());
  for (std::size_t r : p.rows_plus) out.push_back(eqs[r]);
  return out;
}

bool is_pso_ranks(const StructuralModel& model, const IndexSet& eqs) {
  return !eqs.empty() && overdetermined_ranks(model, eqs).size() == eqs.size();
}

std::size_t redundancy_ranks(const StructuralModel& model, const IndexSet& eqs) {
  if (eqs.empty()) return 0;
  if (!is_pso_ranks(model, eqs))
    throw PreconditionError("not a PSO set: " + model.set_of(eqs).to_string());
  return eqs.size() - unknown_ranks_of(model, eqs).size();
}

EquationSet overdetermined_part(const StructuralModel& model, const EquationSet& subset) {
  return model.set_of(overdetermined_ranks(model, model.ranks_of(subset)));
}

std::size_t redundancy(const StructuralModel& model, const EquationSet& subset) {
  return redundancy_ranks(model, model.ranks_of(subset));
}

const char* to_string(PsoClass c) {
  switch (c) {
    case PsoClass::not_pso: return "not-PSO";
    case PsoClass::pso: return "PSO";
    case PsoClass::mso: return "MSO";
  }
  return "?";
}

PsoClass classify_pso(const StructuralModel& model, const EquationSet& subset) {
  const IndexSet eqs = model.ranks_of(subset);
  if (!is_pso_ranks(model, eqs)) return PsoClass::not_pso;

  const bool by_redundancy = redundancy_ranks(model, eqs) == 1;
  bool minimal = true;
  for (std::size_t i = 0; i < eqs.size() && minimal; ++i) {
    IndexSet rest = eqs;
    rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
    minimal = overdetermined_ranks(model, rest).empty();
  }
  if (minimal != by_redundancy)
    throw std::logic_error("MSO criteria disagree on " + subset.to_string());
  return minimal ? PsoClass::mso : PsoClass::pso;
}

std::string render_biadjacency(const BipartiteStructure& g) {
  std::size_t row_w = 0;
  for (const auto& r : g.rows()) row_w = std::max(row_w, r.size());
  std::vector<std::size_t> col_w;
  for (const auto& c : g.cols()) col_w.push_back(std::max<std::size_t>(c.size(), 1));

  std::string out(row_w, ' ');
  for (std::size_t c = 0; c < g.cols().size(); ++c) {
    out += ' ';
    out += g.cols()[c];
  }
  out += '\n';
  for (std::size_t r = 0; r < g.rows().size(); ++r) {
    std::string line = g.rows()[r];
    line.resize(row_w, ' ');
    for (std::size_t c = 0; c < g.cols().size(); ++c) {
      line += ' ';
      std::string cell(col_w[c], ' ');
      if (g.has_edge(r, c)) cell[0] = 'X';
      line += cell;
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace structdiag
