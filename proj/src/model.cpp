/// @file model.cpp
/// Model validation, the JSON model file format, and fault bookkeeping.

#include "structdiag/model.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "structdiag/error.hpp"

namespace structdiag {

namespace {

using nlohmann::json;

std::size_t rank_in(const std::vector<std::string>& sorted, std::string_view id) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
  return static_cast<std::size_t>(it - sorted.begin());
}

bool sorted_contains(const std::vector<std::string>& sorted, std::string_view id) {
  auto it = std::lower_bound(sorted.begin(), sorted.end(), id);
  return it != sorted.end() && *it == id;
}

std::vector<std::string> sorted_unique(const std::vector<std::string>& ids,
                                       std::string_view what) {
  std::vector<std::string> out = ids;
  std::sort(out.begin(), out.end());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (out[i].empty()) throw InputError("empty " + std::string(what) + " id");
    if (i && out[i] == out[i - 1])
      throw InputError("duplicate " + std::string(what) + " id '" + out[i] + "'");
  }
  return out;
}

}  // namespace

bool Equation::is_differential() const {
  return std::any_of(incidences.begin(), incidences.end(), [](const Incidence& i) {
    return i.occurrence == Occurrence::differentiated;
  });
}

StructuralModel::StructuralModel(std::string name,
                                 std::vector<std::string> unknowns,
                                 std::vector<std::string> knowns,
                                 std::vector<std::string> faults,
                                 std::vector<Equation> equations)
    : name_(std::move(name)),
      unknowns_(std::move(unknowns)),
      knowns_(std::move(knowns)),
      faults_(std::move(faults)),
      equations_(std::move(equations)) {
  sorted_unknowns_ = sorted_unique(unknowns_, "unknown");
  sorted_faults_ = sorted_unique(faults_, "fault");
  const auto sorted_knowns = sorted_unique(knowns_, "known");

  std::vector<std::string> eq_ids;
  eq_ids.reserve(equations_.size());
  for (const auto& e : equations_) eq_ids.push_back(e.id);
  const auto sorted_eqs = sorted_unique(eq_ids, "equation");

  by_rank_.resize(equations_.size());
  for (std::size_t pos = 0; pos < equations_.size(); ++pos) {
    std::size_t rank = rank_in(sorted_eqs, equations_[pos].id);
    by_rank_[rank] = pos;
    rank_of_equation_.emplace(equations_[pos].id, rank);
  }

  constexpr std::size_t kNoHome = static_cast<std::size_t>(-1);
  fault_home_.assign(sorted_faults_.size(), kNoHome);
  std::vector<bool> unknown_used(sorted_unknowns_.size(), false);
  structure_.resize(equations_.size());

  for (std::size_t rank = 0; rank < equations_.size(); ++rank) {
    const Equation& eq = equations_[by_rank_[rank]];
    EquationStructure& st = structure_[rank];
    std::set<std::pair<std::string, Occurrence>> seen;
    for (const auto& inc : eq.incidences) {
      if (!sorted_contains(sorted_unknowns_, inc.variable))
        throw InputError("equation '" + eq.id + "' references undeclared unknown '" +
                         inc.variable + "'");
      if (!seen.emplace(inc.variable, inc.occurrence).second)
        throw InputError("equation '" + eq.id + "' lists unknown '" + inc.variable +
                         "' twice with the same occurrence kind");
      std::size_t u = rank_in(sorted_unknowns_, inc.variable);
      unknown_used[u] = true;
      st.unknowns.push_back(u);
      if (inc.occurrence == Occurrence::algebraic) {
        st.algebraic.push_back(u);
      } else {
        if (st.differentiated)
          throw InputError("equation '" + eq.id +
                           "' has more than one differentiated incidence");
        st.differentiated = u;
      }
    }
    for (const auto& k : eq.knowns) {
      if (!sorted_contains(sorted_knowns, k))
        throw InputError("equation '" + eq.id + "' references undeclared known '" +
                         k + "'");
    }
    std::set<std::string> eq_faults;
    for (const auto& f : eq.faults) {
      if (!sorted_contains(sorted_faults_, f))
        throw InputError("equation '" + eq.id + "' references undeclared fault '" +
                         f + "'");
      if (!eq_faults.insert(f).second)
        throw InputError("equation '" + eq.id + "' lists fault '" + f + "' twice");
      std::size_t fr = rank_in(sorted_faults_, f);
      if (fault_home_[fr] != kNoHome)
        throw InputError("fault in multiple equations: '" + f + "' appears in '" +
                         equation_id(fault_home_[fr]) + "' and '" + eq.id +
                         "'");
      fault_home_[fr] = rank;
      st.faults.push_back(fr);
    }
    for (IndexSet* v : {&st.unknowns, &st.algebraic, &st.faults}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
  }

  for (std::size_t f = 0; f < fault_home_.size(); ++f) {
    if (fault_home_[f] == kNoHome)
      throw InputError("fault '" + sorted_faults_[f] + "' appears in no equation");
  }
  for (std::size_t u = 0; u < unknown_used.size(); ++u) {
    if (!unknown_used[u])
      throw InputError("unknown '" + sorted_unknowns_[u] + "' appears in no equation");
  }
}

const Equation& StructuralModel::equation(std::string_view id) const {
  auto it = rank_of_equation_.find(id);
  if (it == rank_of_equation_.end())
    throw UnknownIdError("unknown equation id '" + std::string(id) + "'");
  return equations_[by_rank_[it->second]];
}

bool StructuralModel::has_equation(std::string_view id) const {
  return rank_of_equation_.find(id) != rank_of_equation_.end();
}

bool StructuralModel::has_fault(std::string_view id) const {
  return sorted_contains(sorted_faults_, id);
}

const std::string& StructuralModel::fault_home(std::string_view fault) const {
  if (!has_fault(fault))
    throw UnknownIdError("unknown fault id '" + std::string(fault) + "'");
  return equation_id(fault_home_[rank_in(sorted_faults_, fault)]);
}

EquationSet StructuralModel::all_equations() const {
  std::vector<std::string> ids;
  for (const auto& e : equations_) ids.push_back(e.id);
  return EquationSet(std::move(ids));
}

VariableSet StructuralModel::unknowns_of(const EquationSet& subset) const {
  const IndexSet ranks = ranks_of(subset);
  return variables_of(unknown_ranks_of(*this, ranks));
}

IndexSet StructuralModel::ranks_of(const EquationSet& subset) const {
  IndexSet out;
  out.reserve(subset.size());
  for (const auto& id : subset) {
    auto it = rank_of_equation_.find(id);
    if (it == rank_of_equation_.end())
      throw UnknownIdError("unknown equation id '" + id + "'");
    out.push_back(it->second);
  }
  // Canonical id order and rank order coincide, so `out` is already sorted.
  return out;
}

IndexSet StructuralModel::fault_ranks_of(const FaultSignature& faults) const {
  IndexSet out;
  for (const auto& f : faults) {
    if (!has_fault(f)) throw UnknownIdError("unknown fault id '" + f + "'");
    out.push_back(rank_in(sorted_faults_, f));
  }
  return out;
}

IndexSet StructuralModel::all_ranks() const {
  IndexSet out(equations_.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = i;
  return out;
}

EquationSet StructuralModel::set_of(std::span<const std::size_t> ranks) const {
  std::vector<std::string> ids;
  ids.reserve(ranks.size());
  for (std::size_t r : ranks) ids.push_back(equation_id(r));
  return EquationSet(std::move(ids));
}

VariableSet StructuralModel::variables_of(
    std::span<const std::size_t> unknown_ranks) const {
  std::vector<std::string> ids;
  for (std::size_t r : unknown_ranks) ids.push_back(sorted_unknowns_[r]);
  return VariableSet(std::move(ids));
}

FaultSignature StructuralModel::signature_of(
    std::span<const std::size_t> fault_ranks) const {
  std::vector<std::string> ids;
  for (std::size_t r : fault_ranks) ids.push_back(sorted_faults_[r]);
  return FaultSignature(std::move(ids));
}

bool operator==(const StructuralModel& a, const StructuralModel& b) {
  return a.name_ == b.name_ && a.unknowns_ == b.unknowns_ && a.knowns_ == b.knowns_ &&
         a.faults_ == b.faults_ && a.equations_ == b.equations_;
}

IndexSet unknown_ranks_of(const StructuralModel& model,
                          std::span<const std::size_t> eqs) {
  IndexSet out;
  for (std::size_t e : eqs) {
    const auto& u = model.structure(e).unknowns;
    out.insert(out.end(), u.begin(), u.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

IndexSet fault_ranks_of_equations(const StructuralModel& model,
                                  std::span<const std::size_t> eqs) {
  IndexSet out;
  for (std::size_t e : eqs) {
    const auto& f = model.structure(e).faults;
    out.insert(out.end(), f.begin(), f.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

FaultSignature faults_of(const StructuralModel& model, const EquationSet& subset) {
  const IndexSet ranks = model.ranks_of(subset);
  return model.signature_of(fault_ranks_of_equations(model, ranks));
}

EquationSet equations_of_faults(const StructuralModel& model,
                                const FaultSignature& modes) {
  std::vector<std::string> ids;
  for (const auto& f : modes) ids.push_back(model.fault_home(f));
  return EquationSet(std::move(ids));
}

SemiExplicitPartition classify_semi_explicit(const StructuralModel& model,
                                             const EquationSet& subset) {
  const IndexSet ranks = model.ranks_of(subset);
  IndexSet diff, non_diff, x1;
  for (std::size_t e : ranks) {
    const auto& st = model.structure(e);
    if (st.differentiated) {
      diff.push_back(e);
      x1.push_back(*st.differentiated);
    } else {
      non_diff.push_back(e);
    }
  }
  std::sort(x1.begin(), x1.end());
  x1.erase(std::unique(x1.begin(), x1.end()), x1.end());
  IndexSet x2;
  const IndexSet all = unknown_ranks_of(model, ranks);
  std::set_difference(all.begin(), all.end(), x1.begin(), x1.end(),
                      std::back_inserter(x2));
  return {model.set_of(diff), model.set_of(non_diff), model.variables_of(x1),
          model.variables_of(x2)};
}

std::vector<std::string> split_id_list(std::string_view list) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= list.size()) {
    std::size_t end = list.find(',', start);
    if (end == std::string_view::npos) end = list.size();
    std::string_view item = list.substr(start, end - start);
    while (!item.empty() && (item.front() == ' ' || item.front() == '\t'))
      item.remove_prefix(1);
    while (!item.empty() && (item.back() == ' ' || item.back() == '\t'))
      item.remove_suffix(1);
    if (!item.empty()) out.emplace_back(item);
    start = end + 1;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Model file format

namespace {

std::pair<std::size_t, std::size_t> line_column(std::string_view text,
                                                std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

const json& member(const json& obj, const char* key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw InputError(path + ": missing required field '" + key + "'");
  return *it;
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw InputError(path + ": expected a string");
  return v.get<std::string>();
}

std::vector<std::string> string_list(const json& obj, const char* key,
                                     const std::string& path, bool required) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw InputError(path + ": missing required field '" + key + "'");
    return {};
  }
  const std::string here = path + "." + key;
  if (!it->is_array()) throw InputError(here + ": expected an array");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < it->size(); ++i)
    out.push_back(as_string((*it)[i], here + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

StructuralModel parse_model(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    // e.byte is 1-based and points one past the offending character.
    auto [line, col] = line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string msg = e.what();
    if (auto pos = msg.find("syntax error"); pos != std::string::npos)
      msg = msg.substr(pos);
    throw ParseError(msg, line, col);
  }
  if (!doc.is_object()) throw InputError("$: expected a JSON object");

  std::string name;
  if (auto it = doc.find("name"); it != doc.end()) name = as_string(*it, "$.name");
  auto unknowns = string_list(doc, "unknowns", "$", true);
  auto knowns = string_list(doc, "knowns", "$", false);
  auto faults = string_list(doc, "faults", "$", false);

  const json& eqs = member(doc, "equations", "$");
  if (!eqs.is_array()) throw InputError("$.equations: expected an array");
  std::vector<Equation> equations;
  for (std::size_t i = 0; i < eqs.size(); ++i) {
    const std::string path = "$.equations[" + std::to_string(i) + "]";
    const json& e = eqs[i];
    if (!e.is_object()) throw InputError(path + ": expected an object");
    Equation eq;
    eq.id = as_string(member(e, "id", path), path + ".id");
    if (auto it = e.find("unknowns"); it != e.end()) {
      if (!it->is_array()) throw InputError(path + ".unknowns: expected an array");
      for (std::size_t j = 0; j < it->size(); ++j) {
        const std::string ipath = path + ".unknowns[" + std::to_string(j) + "]";
        const json& inc = (*it)[j];
        Incidence incidence;
        if (inc.is_string()) {
          incidence.variable = inc.get<std::string>();
        } else if (inc.is_object()) {
          incidence.variable = as_string(member(inc, "var", ipath), ipath + ".var");
          if (auto d = inc.find("diff"); d != inc.end()) {
            if (!d->is_boolean()) throw InputError(ipath + ".diff: expected a boolean");
            if (d->get<bool>()) incidence.occurrence = Occurrence::differentiated;
          }
        } else {
          throw InputError(ipath + ": expected an object or a string");
        }
        eq.incidences.push_back(std::move(incidence));
      }
    }
    eq.knowns = string_list(e, "knowns", path, false);
    eq.faults = string_list(e, "faults", path, false);
    equations.push_back(std::move(eq));
  }
  return StructuralModel(std::move(name), std::move(unknowns), std::move(knowns),
                         std::move(faults), std::move(equations));
}

StructuralModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open model file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model(buf.str());
}

std::string serialize_model(const StructuralModel& model) {
  json doc = json::object();
  doc["name"] = model.name();
  doc["unknowns"] = model.unknown_ids();
  doc["knowns"] = model.known_ids();
  doc["faults"] = model.fault_ids();
  json eqs = json::array();
  for (const auto& e : model.equations()) {
    json je = json::object();
    je["id"] = e.id;
    json incs = json::array();
    for (const auto& inc : e.incidences) {
      incs.push_back({{"var", inc.variable},
                      {"diff", inc.occurrence == Occurrence::differentiated}});
    }
    je["unknowns"] = std::move(incs);
    je["knowns"] = e.knowns;
    je["faults"] = e.faults;
    eqs.push_back(std::move(je));
  }
  doc["equations"] = std::move(eqs);
  return doc.dump(2) + "\n";
}

}  // namespace structdiag
