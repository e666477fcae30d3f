// structdiag: command-line front end over the structdiag C API.

#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "structdiag/structdiag.h"

namespace {

struct Options {
  std::string model_path;
  std::string operator_name = "plus";
  std::string format = "table";
  std::size_t oracle_bound = 0;
  std::string from_mode;
  std::string wrt_mode;
  std::vector<std::string> sets;
  std::string target_fault;
};

void add_common(CLI::App* sub, Options& opt, bool with_operator) {
  sub->add_option("model", opt.model_path, "Model file (JSON)")->required();
  if (with_operator)
    sub->add_option("--operator,-o", opt.operator_name, "Testability operator")
        ->check(CLI::IsMember({"plus", "backsub", "lowindex"}));
  sub->add_option("--format,-f", opt.format, "Output format")
      ->check(CLI::IsMember({"table", "json", "csv"}));
  sub->add_option("--oracle-bound", opt.oracle_bound,
                  "Largest equation count for brute-force oracles (default 16)");
}

std::size_t env_oracle_bound() {
  const char* v = std::getenv("STRUCTDIAG_ORACLE_BOUND");
  if (!v || !*v) return 0;
  char* end = nullptr;
  unsigned long long n = std::strtoull(v, &end, 10);
  if (*end != '\0' || n == 0) {
    std::fprintf(stderr, "warning: ignoring invalid STRUCTDIAG_ORACLE_BOUND '%s'\n", v);
    return 0;
  }
  return static_cast<std::size_t>(n);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural fault diagnosis: redundant submodels, RG sets and isolability"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(sd_version()));

  Options opt;
  struct Spec {
    const char* name;
    const char* help;
    bool with_operator;
  };
  const Spec specs[] = {
      {"dm", "Dulmage-Mendelsohn decomposition of the whole model", false},
      {"mso", "Minimal structurally overdetermined sets", false},
      {"mtes", "Minimal test equation supports and their test supports", false},
      {"rg", "All RG sets under an operator", true},
      {"irg", "Irreducible RG sets under an operator", true},
      {"detect", "Structurally detectable faults", true},
      {"isolate", "Structural isolability between fault modes", true},
      {"residual", "Linear residuals by back-substitution, fused by minimum variance", false},
      {"oracle-check", "Cross-check every enumerator against brute force", false},
  };
  std::vector<CLI::App*> subs;
  for (const auto& s : specs) {
    CLI::App* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, opt, s.with_operator);
    subs.push_back(sub);
  }
  CLI::App* isolate = app.get_subcommand("isolate");
  isolate->add_option("--from", opt.from_mode, "Fault mode to isolate, e.g. f3");
  isolate->add_option("--wrt", opt.wrt_mode, "Fault mode to isolate from, e.g. f1,f2");
  CLI::App* residual = app.get_subcommand("residual");
  residual->add_option("--set", opt.sets, "Equation set, e.g. e1,e2,e5 (repeatable)")
      ->required();
  residual->add_option("--fault", opt.target_fault, "Fusion target fault");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return SD_ERROR_INPUT;
  }

  const char* command = nullptr;
  for (CLI::App* sub : subs)
    if (sub->parsed()) command = sub->get_name().c_str();

  std::vector<const char*> sets;
  for (const auto& s : opt.sets) sets.push_back(s.c_str());

  sd_run_config config{};
  config.command = command;
  config.model_path = opt.model_path.c_str();
  config.operator_name = opt.operator_name.c_str();
  config.format = opt.format.c_str();
  config.oracle_bound = opt.oracle_bound ? opt.oracle_bound : env_oracle_bound();
  config.from_mode = opt.from_mode.empty() ? nullptr : opt.from_mode.c_str();
  config.wrt_mode = opt.wrt_mode.empty() ? nullptr : opt.wrt_mode.c_str();
  config.residual_sets = sets.data();
  config.residual_set_count = sets.size();
  config.target_fault = opt.target_fault.empty() ? nullptr : opt.target_fault.c_str();

  char* out = nullptr;
  char* err = nullptr;
  const sd_status status = sd_run(&config, &out, &err);
  if (out) std::fputs(out, stdout);
  if (err) std::fputs(err, stderr);
  if (!out && !err && status != SD_OK) std::fprintf(stderr, "error: %s\n", sd_last_error());
  sd_string_free(out);
  sd_string_free(err);
  return static_cast<int>(status);
}
