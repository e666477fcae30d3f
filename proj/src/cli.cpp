#include "structdiag/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "structdiag/enumerate.hpp"
#include "structdiag/error.hpp"
#include "structdiag/graph.hpp"
#include "structdiag/linres.hpp"
#include "structdiag/model.hpp"

namespace structdiag {

namespace {

using nlohmann::json;
using Rows = std::vector<std::vector<std::string>>;

/// Thrown when an oracle disagrees with an enumerator.
class OracleMismatch : public Error {
 public:
  using Error::Error;
};

std::string space_joined(const std::vector<std::string>& ids) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ' ';
    out += ids[i];
  }
  return out;
}

template <class Tag>
std::string cell(const IdSet<Tag>& s, OutputFormat f) {
  return f == OutputFormat::csv ? space_joined(s.members()) : s.to_string();
}

std::string format_double(double v) {
  if (v == 0.0) v = 0.0;  // drop the sign of negative zero
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string render(OutputFormat f, const std::vector<std::string>& header, const Rows& rows) {
  return f == OutputFormat::csv ? render_csv(header, rows) : render_table(header, rows);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------

std::string run_dm(const StructuralModel& model, OutputFormat f) {
  const EquationSet all = model.all_equations();
  const DmResult dm = dm_decompose(model, all);
  if (f == OutputFormat::json) {
    json j;
    j["m_plus"] = dm.m_plus.members();
    j["m_zero"] = dm.m_zero.members();
    j["m_minus"] = dm.m_minus.members();
    j["x_plus"] = dm.x_plus.members();
    j["x_zero"] = dm.x_zero.members();
    j["x_minus"] = dm.x_minus.members();
    json m = json::array();
    for (const auto& [e, x] : dm.matching) m.push_back({e, x});
    j["matching"] = std::move(m);
    j["redundancy"] = redundancy(model, dm.m_plus);
    return dump(j);
  }
  Rows rows = {{"M+", cell(dm.m_plus, f), cell(dm.x_plus, f)},
               {"M0", cell(dm.m_zero, f), cell(dm.x_zero, f)},
               {"M-", cell(dm.m_minus, f), cell(dm.x_minus, f)}};
  std::string out = render(f, {"part", "equations", "unknowns"}, rows);
  if (f == OutputFormat::table) {
    out += "\nredundancy of M+: " + std::to_string(redundancy(model, dm.m_plus)) + "\n\n";
    out += render_biadjacency(bipartite_of(model, all));
  }
  return out;
}

std::string run_mso(const StructuralModel& model, OutputFormat f) {
  const auto msos = find_msos(model, model.all_equations());
  if (f == OutputFormat::json) {
    json j = json::array();
    for (const auto& m : msos)
      j.push_back({{"set", m.members()}, {"faults", faults_of(model, m).members()}});
    return dump(j);
  }
  Rows rows;
  for (const auto& m : msos) rows.push_back({cell(m, f), cell(faults_of(model, m), f)});
  return render(f, {"MSO set", "Faults"}, rows);
}

std::string run_mtes(const StructuralModel& model, OutputFormat f) {
  const auto mtes = find_mtes(model);
  if (f == OutputFormat::json) {
    json j = json::array();
    for (const auto& m : mtes)
      j.push_back({{"set", m.members()},
                   {"signature", faults_of(model, m).members()},
                   {"redundancy", redundancy(model, m)}});
    return dump(j);
  }
  Rows rows;
  for (const auto& m : mtes) rows.push_back({cell(m, f), cell(faults_of(model, m), f)});
  return render(f, {"MTES", "Test support"}, rows);
}

std::string run_rg(const StructuralModel& model, const RunConfig& cfg, bool irreducible_only) {
  const auto& op = operator_by_name(cfg.operator_name);
  auto results = find_irg(find_rg(model, op, cfg.oracle_bound));
  if (irreducible_only)
    results.erase(std::remove_if(results.begin(), results.end(),
                                 [](const RgResult& r) { return !r.irreducible; }),
                  results.end());
  const OutputFormat f = cfg.format;
  if (f == OutputFormat::json) {
    json j = json::array();
    for (const auto& r : results)
      j.push_back({{"set", r.set.members()},
                   {"signature", r.signature.members()},
                   {"irreducible", r.irreducible},
                   {"redundancy", r.redundancy}});
    return dump(j);
  }
  Rows rows;
  for (const auto& r : results) rows.push_back({cell(r.set, f), cell(r.signature, f)});
  return render(f, {irreducible_only ? "IRG set" : "RG set", "Fault signature"}, rows);
}

std::string run_detect(const StructuralModel& model, const RunConfig& cfg) {
  const auto& op = operator_by_name(cfg.operator_name);
  const FaultSignature detectable = detectable_faults(model, op, cfg.oracle_bound);
  std::vector<std::string> all(model.fault_ids());
  std::sort(all.begin(), all.end());
  if (cfg.format == OutputFormat::json) {
    const FaultSignature everything(all);
    json j;
    j["operator"] = op.name();
    j["mstar"] = mstar(model, model.all_equations(), op, cfg.oracle_bound).members();
    j["detectable"] = detectable.members();
    j["undetectable"] = (everything - detectable).members();
    return dump(j);
  }
  Rows rows;
  for (const auto& fault : all)
    rows.push_back({fault, detectable.contains(fault) ? "yes" : "no"});
  return render(cfg.format, {"fault", "detectable"}, rows);
}

json verdict_json(const IsolabilityVerdict& v) {
  json j;
  j["from"] = v.from_mode.members();
  j["wrt"] = v.wrt_mode.members();
  j["isolable"] = v.isolable;
  j["witness"] = v.witness ? json(*v.witness) : json(nullptr);
  return j;
}

std::string run_isolate(const StructuralModel& model, const RunConfig& cfg) {
  const auto& op = operator_by_name(cfg.operator_name);
  const OutputFormat f = cfg.format;
  if (cfg.from_mode.empty() != cfg.wrt_mode.empty())
    throw InputError("isolate needs both --from and --wrt, or neither");

  if (!cfg.from_mode.empty()) {
    const auto v = isolability(model, op, FaultSignature(cfg.from_mode),
                               FaultSignature(cfg.wrt_mode), cfg.oracle_bound);
    if (f == OutputFormat::json) return dump(verdict_json(v));
    return render(f, {"from", "wrt", "isolable", "witness"},
                  {{cell(v.from_mode, f), cell(v.wrt_mode, f), v.isolable ? "yes" : "no",
                    v.witness.value_or("-")}});
  }

  const auto matrix = isolability_matrix(model, op, cfg.oracle_bound);
  if (f == OutputFormat::json) {
    json j = json::array();
    for (const auto& v : matrix) j.push_back(verdict_json(v));
    return dump(j);
  }
  if (f == OutputFormat::csv) {
    Rows rows;
    for (const auto& v : matrix)
      rows.push_back({cell(v.from_mode, f), cell(v.wrt_mode, f), v.isolable ? "1" : "0",
                      v.witness.value_or("")});
    return render_csv({"from", "wrt", "isolable", "witness"}, rows);
  }
  // Row: isolated fault; column: fault it is isolated from.
  const std::size_t n = model.fault_count();
  std::vector<std::string> header{"from\\wrt"};
  for (std::size_t j = 0; j < n; ++j) header.push_back(model.fault_id(j));
  Rows rows;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row{model.fault_id(i)};
    for (std::size_t j = 0; j < n; ++j) row.push_back(matrix[i * n + j].isolable ? "X" : ".");
    rows.push_back(std::move(row));
  }
  return render_table(header, rows);
}

std::string rational_string(const Rational& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

// "-u1 + u2 + 1/2*y3"; "0" when every gain vanishes.
std::string linear_form(const std::vector<std::string>& ids, const std::vector<Rational>& gains) {
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (gains[i] == 0) continue;
    const bool neg = gains[i] < 0;
    const Rational mag = neg ? Rational(-gains[i]) : gains[i];
    if (out.empty()) out += neg ? "-" : "";
    else out += neg ? " - " : " + ";
    if (mag != 1) out += rational_string(mag) + "*";
    out += ids[i];
  }
  return out.empty() ? "0" : out;
}

std::string run_residual(const StructuralModel& model, std::string_view text,
                         const RunConfig& cfg) {
  if (cfg.residual_sets.empty()) throw InputError("residual needs at least one --set");
  const LinearStaticModel lin = parse_linear_model(text, model);

  struct Derived {
    EquationSet set;
    ComputationOrder order;
    std::string equation;
    ExactResidual exact;
    LinearResidual residual;
  };
  std::vector<Derived> derived;
  for (const auto& ids : cfg.residual_sets) {
    const EquationSet set(ids);
    const ComputationOrder order = computation_order(model, set);
    for (const auto& eq : order.residual_equations)
      derived.push_back({set, order, eq, derive_residual_exact(lin, order, eq),
                         derive_residual(lin, order, eq)});
  }

  std::optional<FusionResult> fusion;
  std::string target = cfg.target_fault;
  if (derived.size() >= 2) {
    if (target.empty()) {
      const auto& g = derived.front().residual.fault_gains;
      auto it = std::find_if(g.begin(), g.end(), [](double x) { return x != 0.0; });
      if (it == g.end()) throw PreconditionError("first residual is insensitive to every fault");
      target = derived.front().residual.fault_ids[static_cast<std::size_t>(it - g.begin())];
    }
    std::vector<LinearResidual> rs;
    for (const auto& d : derived) rs.push_back(d.residual);
    fusion = min_variance_fusion(rs, target, lin.noise_cov());
  }

  auto pivots_text = [](const ComputationOrder& o) {
    std::string s;
    for (const auto& [e, x] : o.pivots) s += (s.empty() ? "" : " ") + e + ":" + x;
    return s;
  };

  if (cfg.format == OutputFormat::json) {
    json j;
    json list = json::array();
    for (std::size_t i = 0; i < derived.size(); ++i) {
      const auto& d = derived[i];
      json r;
      r["name"] = "r" + std::to_string(i + 1);
      r["set"] = d.set.members();
      json piv = json::array();
      for (const auto& [e, x] : d.order.pivots) piv.push_back({e, x});
      r["pivots"] = std::move(piv);
      r["residual_equation"] = d.equation;
      auto gains = [](const std::vector<std::string>& ids, const std::vector<double>& g) {
        json m = json::object();
        for (std::size_t k = 0; k < ids.size(); ++k)
          if (g[k] != 0.0) m[ids[k]] = g[k];
        return m;
      };
      r["known_gains"] = gains(d.residual.known_ids, d.residual.known_gains);
      r["fault_gains"] = gains(d.residual.fault_ids, d.residual.fault_gains);
      r["noise_gains"] = gains(d.residual.noise_ids, d.residual.noise_gains);
      r["variance"] = d.residual.variance;
      list.push_back(std::move(r));
    }
    j["residuals"] = std::move(list);
    if (fusion) {
      json fj;
      fj["target"] = target;
      fj["weights"] = fusion->weights;
      fj["variance"] = fusion->variance;
      json cov = json::array();
      for (Eigen::Index a = 0; a < fusion->residual_cov.rows(); ++a) {
        json row = json::array();
        for (Eigen::Index b = 0; b < fusion->residual_cov.cols(); ++b)
          row.push_back(fusion->residual_cov(a, b));
        cov.push_back(std::move(row));
      }
      fj["residual_covariance"] = std::move(cov);
      j["fusion"] = std::move(fj);
    }
    return dump(j);
  }

  const OutputFormat f = cfg.format;
  Rows rows;
  for (std::size_t i = 0; i < derived.size(); ++i) {
    const auto& d = derived[i];
    rows.push_back({"r" + std::to_string(i + 1), cell(d.set, f), pivots_text(d.order), d.equation,
                    linear_form(lin.known_ids(), d.exact.known_gains),
                    linear_form(lin.fault_ids(), d.exact.fault_gains),
                    linear_form(lin.noise_ids(), d.exact.noise_gains),
                    format_double(d.residual.variance)});
  }
  std::string out = render(f, {"residual", "set", "pivots", "equation", "computed from",
                               "faults", "noise", "variance"},
                           rows);
  if (fusion && f == OutputFormat::table) {
    std::vector<std::string> header{"covariance"};
    for (std::size_t i = 0; i < derived.size(); ++i) header.push_back("r" + std::to_string(i + 1));
    Rows cov;
    for (Eigen::Index a = 0; a < fusion->residual_cov.rows(); ++a) {
      std::vector<std::string> row{"r" + std::to_string(a + 1)};
      for (Eigen::Index b = 0; b < fusion->residual_cov.cols(); ++b)
        row.push_back(format_double(fusion->residual_cov(a, b)));
      cov.push_back(std::move(row));
    }
    out += "\n" + render_table(header, cov);
    std::string weights;
    for (double w : fusion->weights) weights += (weights.empty() ? "" : " ") + format_double(w);
    out += "\nfusion target: " + target + "\nweights: " + weights +
           "\nfused variance: " + format_double(fusion->variance) + "\n";
  }
  return out;
}

std::string run_oracle_check(const StructuralModel& model, const RunConfig& cfg) {
  struct Check {
    std::string name, op;
    bool ok;
    std::string detail;
  };
  std::vector<Check> checks;
  const EquationSet all = model.all_equations();
  const std::size_t bound = cfg.oracle_bound;

  {
    const auto fast = find_msos(model, all);
    const auto slow = brute_force_msos(model, all, bound);
    checks.push_back({"mso", "-", fast == slow,
                      std::to_string(fast.size()) + " vs " + std::to_string(slow.size()) + " sets"});
  }
  const auto& registry = OperatorRegistry::builtin();
  for (const auto& name : registry.names()) {
    const auto& op = registry.get(name);
    const auto oracle = brute_force_mstar(model, all, op, bound);
    const EquationSet fast = mstar(model, all, op, bound);
    checks.push_back({"mstar", name, fast == oracle.set && oracle.violations.empty(),
                      oracle.violations.empty() ? fast.to_string() : oracle.violations.front()});

    const auto rg = find_rg(model, op, bound);
    const auto rg_oracle = brute_force_rg(model, op, bound);
    checks.push_back({"rg", name, rg == rg_oracle.results && rg_oracle.violations.empty(),
                      rg_oracle.violations.empty()
                          ? std::to_string(rg.size()) + " vs " +
                                std::to_string(rg_oracle.results.size()) + " sets"
                          : rg_oracle.violations.front()});
  }
  {
    const auto fast = find_mtes(model);
    std::vector<EquationSet> slow;
    const auto tes = brute_force_rg(model, plus_operator(), bound).results;
    for (const auto& t : tes) {
      const bool minimal = std::none_of(tes.begin(), tes.end(), [&](const RgResult& o) {
        return o.set != t.set && o.set.is_subset_of(t.set);
      });
      if (minimal) slow.push_back(t.set);
    }
    checks.push_back({"mtes", "-", fast == slow,
                      std::to_string(fast.size()) + " vs " + std::to_string(slow.size()) + " sets"});
  }

  const bool all_ok =
      std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.ok; });
  std::string out;
  if (cfg.format == OutputFormat::json) {
    json j = json::array();
    for (const auto& c : checks)
      j.push_back({{"check", c.name}, {"operator", c.op}, {"ok", c.ok}, {"detail", c.detail}});
    out = dump(j);
  } else {
    Rows rows;
    for (const auto& c : checks)
      rows.push_back({c.name, c.op, c.ok ? "ok" : "MISMATCH", c.detail});
    out = render(cfg.format, {"check", "operator", "result", "detail"}, rows);
  }
  if (!all_ok) throw OracleMismatch(out);
  return out;
}

RunOutcome dispatch(const RunConfig& cfg, std::string_view text) {
  RunOutcome outcome;
  try {
    const StructuralModel model = parse_model(text);
    switch (cfg.command) {
      case Command::dm: outcome.out = run_dm(model, cfg.format); break;
      case Command::mso: outcome.out = run_mso(model, cfg.format); break;
      case Command::mtes: outcome.out = run_mtes(model, cfg.format); break;
      case Command::rg: outcome.out = run_rg(model, cfg, false); break;
      case Command::irg: outcome.out = run_rg(model, cfg, true); break;
      case Command::detect: outcome.out = run_detect(model, cfg); break;
      case Command::isolate: outcome.out = run_isolate(model, cfg); break;
      case Command::residual: outcome.out = run_residual(model, text, cfg); break;
      case Command::oracle_check: outcome.out = run_oracle_check(model, cfg); break;
    }
  } catch (const OracleMismatch& e) {
    outcome.out = e.what();
    outcome.err = "oracle mismatch\n";
    outcome.exit_status = kExitOracleMismatch;
  } catch (const InputError& e) {
    outcome.err = std::string("error: ") + e.what() + "\n";
    outcome.exit_status = kExitInput;
  } catch (const UnknownIdError& e) {
    outcome.err = std::string("error: ") + e.what() + "\n";
    outcome.exit_status = kExitInput;
  } catch (const Error& e) {
    outcome.err = std::string("error: ") + e.what() + "\n";
    outcome.exit_status = kExitPrecondition;
  } catch (const std::exception& e) {
    outcome.err = std::string("internal error: ") + e.what() + "\n";
    outcome.exit_status = kExitPrecondition;
  }
  return outcome;
}

}  // namespace

std::optional<Command> parse_command(std::string_view name) {
  static const std::pair<std::string_view, Command> table[] = {
      {"dm", Command::dm},         {"mso", Command::mso},
      {"mtes", Command::mtes},     {"rg", Command::rg},
      {"irg", Command::irg},       {"detect", Command::detect},
      {"isolate", Command::isolate}, {"residual", Command::residual},
      {"oracle-check", Command::oracle_check}};
  for (const auto& [n, c] : table)
    if (n == name) return c;
  return std::nullopt;
}

const char* to_string(Command c) {
  switch (c) {
    case Command::dm: return "dm";
    case Command::mso: return "mso";
    case Command::mtes: return "mtes";
    case Command::rg: return "rg";
    case Command::irg: return "irg";
    case Command::detect: return "detect";
    case Command::isolate: return "isolate";
    case Command::residual: return "residual";
    case Command::oracle_check: return "oracle-check";
  }
  return "?";
}

std::optional<OutputFormat> parse_format(std::string_view name) {
  if (name == "table") return OutputFormat::table;
  if (name == "json") return OutputFormat::json;
  if (name == "csv") return OutputFormat::csv;
  return std::nullopt;
}

RunOutcome execute_text(const RunConfig& config, std::string_view model_text) {
  return dispatch(config, model_text);
}

RunOutcome execute(const RunConfig& config) {
  std::ifstream in(config.model_path, std::ios::binary);
  if (!in) {
    RunOutcome outcome;
    outcome.exit_status = kExitInput;
    outcome.err = "error: cannot open model file '" + config.model_path + "'\n";
    return outcome;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return dispatch(config, buf.str());
}

std::string render_table(const std::vector<std::string>& header, const Rows& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i)
      width[i] = std::max(width[i], r[i].size());
  };
  measure(header);
  for (const auto& r : rows) measure(r);

  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t i = 0; i < width.size(); ++i) {
      std::string c = i < r.size() ? r[i] : "";
      if (i + 1 < width.size()) c.resize(width[i], ' ');
      s += c;
      if (i + 1 < width.size()) s += "  ";
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + "\n";
  };
  std::string out = line(header);
  std::vector<std::string> rule;
  for (std::size_t w : width) rule.emplace_back(w, '-');
  out += line(rule);
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string render_csv(const std::vector<std::string>& header, const Rows& rows) {
  auto field = [](const std::string& v) {
    if (v.find_first_of(",\"\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += field(r[i]);
    }
    return s + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

}  // namespace structdiag
