// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "structdiag/cli.hpp"
#include "structdiag/enumerate.hpp"
#include "structdiag/graph.hpp"
#include "structdiag/linres.hpp"
#include "structdiag/operators.hpp"
#include "testkit.hpp"

using namespace structdiag;
using testkit::eqs;
using testkit::sig;
using testkit::vars;
using testkit::Mask;

namespace {

constexpr double kFastLimitSeconds = 1.0;
constexpr double kCorpusLimitSeconds = 300.0;
constexpr double kFusionTolerance = 1e-12;
constexpr int kCorpusSize = 250;
constexpr std::uint64_t kCorpusSeed = 20240601;

struct Check {
  bool ok = true;
  std::vector<std::string> notes;
  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      notes.push_back("failed: " + what);
    }
  }
  void note(const std::string& s) { notes.push_back(s); }
};

int failures = 0;

void criterion(int id, const char* title, double limit, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.notes.push_back(std::string("exception: ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs >= limit) {
    c.ok = false;
    c.notes.push_back("runtime " + std::to_string(secs) + " s exceeds " + std::to_string(limit) + " s");
  }
  std::printf("%s %d %s (%.3f s)\n", c.ok ? "PASS" : "FAIL", id, title, secs);
  for (const auto& n : c.notes) std::printf("     %s\n", n.c_str());
  std::fflush(stdout);
  if (!c.ok) ++failures;
}

Mask full_mask(const StructuralModel& m) { return (Mask{1} << m.equation_count()) - 1; }

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<StructuralModel> corpus() {
  std::mt19937_64 rng(kCorpusSeed);
  std::vector<StructuralModel> out;
  for (int i = 0; i < kCorpusSize; ++i) out.push_back(testkit::random_model(rng));
  return out;
}

const std::vector<std::string> kOperators = {"plus", "backsub", "lowindex"};

void table_reproduction(Check& c, Command cmd, const char* op, const std::string& expected) {
  RunConfig cfg;
  cfg.model_path = testkit::eq4_path();
  cfg.command = cmd;
  cfg.operator_name = op;
  const auto r = execute(cfg);
  c.expect(r.exit_status == 0, "exit status 0 (" + r.err + ")");
  c.expect(r.out == expected, "table matches:\n" + r.out);
}

void dm_invariants(Check& c, const StructuralModel& m, const EquationSet& s) {
  const auto dm = dm_decompose(m, s);
  const auto x = m.unknowns_of(s);
  c.expect((dm.m_plus | dm.m_zero | dm.m_minus) == s &&
               dm.m_plus.size() + dm.m_zero.size() + dm.m_minus.size() == s.size(),
           "equation parts partition " + s.to_string());
  c.expect((dm.x_plus | dm.x_zero | dm.x_minus) == x &&
               dm.x_plus.size() + dm.x_zero.size() + dm.x_minus.size() == x.size(),
           "unknown parts partition " + s.to_string());
  c.expect(dm.m_plus.size() > dm.x_plus.size() || (dm.m_plus.empty() && dm.x_plus.empty()),
           "|M+| > |X+| " + s.to_string());
  c.expect(dm.m_zero.size() == dm.x_zero.size(), "|M0| = |X0| " + s.to_string());
  c.expect(dm.m_minus.size() < dm.x_minus.size() || (dm.m_minus.empty() && dm.x_minus.empty()),
           "|M-| < |X-| " + s.to_string());
  for (const auto& e : dm.m_plus)
    c.expect(m.unknowns_of(eqs({e})).is_subset_of(dm.x_plus), "M+ row " + e + " stays in X+");
  for (const auto& e : dm.m_zero)
    c.expect((m.unknowns_of(eqs({e})) & dm.x_minus).empty(), "M0 row " + e + " avoids X-");
}

}  // namespace

int main() {
  criterion(1, "IRG sets of eq4 under lowindex (irg table)", kFastLimitSeconds, [](Check& c) {
    table_reproduction(c, Command::irg, "lowindex",
                       "IRG set           Fault signature\n"
                       "----------------  ---------------\n"
                       "{e4,e5,e6}        {f2,f3}\n"
                       "{e1,e2,e3,e6}     {f1}\n"
                       "{e1,e2,e3,e4,e6}  {f1,f2}\n"
                       "{e1,e2,e3,e5,e6}  {f1,f3}\n");
  });

  criterion(2, "MTESs and test supports of eq4 (mtes table)", kFastLimitSeconds, [](Check& c) {
    table_reproduction(c, Command::mtes, "plus",
                       "MTES           Test support\n"
                       "-------------  ------------\n"
                       "{e1,e2,e3,e6}  {f1}\n"
                       "{e1,e3,e4,e6}  {f2}\n"
                       "{e1,e3,e5,e6}  {f3}\n");
  });

  criterion(3, "RG sets of eq2 under backsub with redundancies 2 and 3", kFastLimitSeconds,
            [](Check& c) {
              const auto m = testkit::eq2_model();
              const auto rs = find_rg(m, backsub_operator());
              c.expect(rs.size() == 2, "two RG sets");
              if (rs.size() != 2) return;
              c.expect(rs[0].set == eqs({"e1", "e2", "e3", "e5"}) && rs[0].signature == sig({"f2"}),
                       "{e1,e2,e3,e5} -> {f2}");
              c.expect(rs[1].set == m.all_equations() && rs[1].signature == sig({"f1", "f2"}),
                       "{e1,e2,e3,e4,e5} -> {f1,f2}");
              c.expect(rs[0].redundancy == 2 && rs[1].redundancy == 3, "redundancies 2 and 3");
            });

  criterion(4, "eq2: largest testable subset without e5 has redundancy 0, full model minus one is 2",
            kFastLimitSeconds, [](Check& c) {
              const auto m = testkit::eq2_model();
              const auto star = mstar(m, m.all_equations().without("e5"), backsub_operator());
              c.expect(star.empty(), "(M minus e5)* is empty, got " + star.to_string());
              c.expect(redundancy(m, star) == 0, "redundancy of (M minus e5)* is 0");
              c.expect(redundancy(m, m.all_equations()) - 1 == 2, "redundancy(M) - 1 = 2");
            });

  criterion(5, "isolability asymmetry on eq2/backsub and eq4/lowindex", kFastLimitSeconds,
            [](Check& c) {
              const auto m2 = testkit::eq2_model();
              const auto m4 = testkit::eq4_model();
              c.expect(isolability(m2, backsub_operator(), sig({"f2"}), sig({"f1"})).isolable,
                       "{f2} isolable from {f1}");
              c.expect(!isolability(m2, backsub_operator(), sig({"f1"}), sig({"f2"})).isolable,
                       "{f1} not isolable from {f2}");
              c.expect(!isolability(m4, lowindex_operator(), sig({"f3"}), sig({"f1", "f2"})).isolable,
                       "{f3} not isolable from {f1,f2}");
            });

  criterion(6, "minimum-variance fusion", kFastLimitSeconds, [](Check& c) {
    Eigen::MatrixXd cov(2, 2);
    cov << 3, -1, -1, 3;
    const auto w = min_variance_weights(cov);
    c.expect(std::abs(w.weights[0] - 0.5) <= kFusionTolerance, "k = 0.5");
    c.expect(std::abs(w.variance - 1.0) <= kFusionTolerance, "variance 1");

    const auto m = testkit::eq2_model();
    const auto lin = parse_linear_model(slurp(testkit::eq2_path()), m);
    const auto r1 = derive_residual(lin, computation_order(m, eqs({"e1", "e2", "e5"})));
    const auto r2 = derive_residual(lin, computation_order(m, eqs({"e1", "e3", "e5"})));
    const auto f = min_variance_fusion({r1, r2}, "f2", lin.noise_cov());
    c.expect(f.variance < 3.0, "fused variance below 3");
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "eq2 pipeline: var(r1)=%g var(r2)=%g sigma12=%g (worked example quotes -1), "
                  "weights %g/%g, fused variance %g",
                  f.residual_cov(0, 0), f.residual_cov(1, 1), f.residual_cov(0, 1), f.weights[0],
                  f.weights[1], f.variance);
    c.note(buf);
    if (std::abs(f.residual_cov(0, 1) + 1.0) > kFusionTolerance)
      c.note("sigma12 differs from the quoted -1; the computed value follows from the model's noise gains");
  });

  criterion(7, "oracle equivalence of mstar and find_rg on the random corpus", kCorpusLimitSeconds,
            [](Check& c) {
              std::size_t mstar_checks = 0, rg_checks = 0, mismatches = 0;
              for (const auto& m : corpus()) {
                for (const auto& name : kOperators) {
                  const auto& op = operator_by_name(name);
                  for (Mask s = 0; s <= full_mask(m); ++s) {
                    const auto subset = testkit::set_of_mask(m, s);
                    const auto brute = brute_force_mstar(m, subset, op);
                    ++mstar_checks;
                    if (mstar(m, subset, op) != brute.set || !brute.violations.empty()) {
                      ++mismatches;
                      c.expect(false, "mstar " + name + " " + subset.to_string() + "\n" + serialize_model(m));
                    }
                  }
                  const auto oracle = brute_force_rg(m, op);
                  ++rg_checks;
                  if (find_rg(m, op) != oracle.results || !oracle.violations.empty()) {
                    ++mismatches;
                    c.expect(false, "find_rg " + name + "\n" + serialize_model(m));
                  }
                }
              }
              c.note(std::to_string(kCorpusSize) + " models, " + std::to_string(mstar_checks) +
                     " mstar checks, " + std::to_string(rg_checks) + " find_rg checks, " +
                     std::to_string(mismatches) + " mismatches");
            });

  criterion(8, "structural invariants on the random corpus", kCorpusLimitSeconds, [](Check& c) {
    std::mt19937_64 rng(kCorpusSeed + 2);
    std::size_t mso_subsets = 0;
    for (const auto& m : corpus()) {
      // DM part sizes and block-triangular emptiness.
      dm_invariants(c, m, m.all_equations());
      for (int k = 0; k < 8; ++k)
        dm_invariants(c, m, testkit::set_of_mask(m, static_cast<Mask>(rng()) & full_mask(m)));

      // M+ idempotence and the redundancy drop.
      const auto plus = overdetermined_part(m, m.all_equations());
      c.expect(overdetermined_part(m, plus) == plus, "M+ idempotent");
      if (!plus.empty()) {
        const std::size_t phi = redundancy(m, plus);
        for (const auto& e : plus)
          c.expect(redundancy(m, overdetermined_part(m, plus.without(e))) == phi - 1,
                   "redundancy drops by one removing " + e + " from " + plus.to_string());
      }

      // MSO minimality by enumeration versus redundancy one.
      if (m.equation_count() <= 8) {
        for (Mask s = 1; s <= full_mask(m); ++s) {
          if (!testkit::oracle_is_pso(m, s)) continue;
          bool minimal = true;
          for (Mask sub = (s - 1) & s; sub && minimal; sub = (sub - 1) & s)
            minimal = !testkit::oracle_is_pso(m, sub);
          const bool phi_one = std::popcount(s) == static_cast<int>(testkit::oracle_unknown_count(m, s)) + 1;
          const auto cls = classify_pso(m, testkit::set_of_mask(m, s));
          c.expect(minimal == phi_one && (cls == PsoClass::mso) == minimal,
                   "MSO criteria agree on " + testkit::set_of_mask(m, s).to_string());
          ++mso_subsets;
        }
      }

      // Irreducible signatures: union coverage and minimality.
      for (const auto& name : kOperators) {
        const auto rs = find_irg(find_rg(m, operator_by_name(name)));
        std::vector<FaultSignature> sigs, basis;
        for (const auto& r : rs) {
          sigs.push_back(r.signature);
          if (r.irreducible) basis.push_back(r.signature);
        }
        c.expect(signatures_covered_by(sigs, basis), "irreducible signatures cover all (" + name + ")");
        for (std::size_t k = 0; k < basis.size(); ++k) {
          auto fewer = basis;
          fewer.erase(fewer.begin() + static_cast<std::ptrdiff_t>(k));
          c.expect(!signatures_covered_by(sigs, fewer),
                   "irreducible " + basis[k].to_string() + " is needed (" + name + ")");
        }
      }
    }
    c.note(std::to_string(mso_subsets) + " PSO subsets checked for MSO agreement");
  });

  return failures == 0 ? 0 : 1;
}
