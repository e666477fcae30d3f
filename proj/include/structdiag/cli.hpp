#pragma once

/// @file cli.hpp
/// Command execution behind the `structdiag` tool: load a model, run one
/// analysis, render the result as an aligned table, JSON or CSV.
///
/// Exit statuses: 0 success, 1 analysis precondition failure, 2 input or
/// parse error, 3 oracle mismatch.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "structdiag/operators.hpp"

namespace structdiag {

enum class Command { dm, mso, mtes, rg, irg, detect, isolate, residual, oracle_check };
enum class OutputFormat { table, json, csv };

std::optional<Command> parse_command(std::string_view name);
std::optional<OutputFormat> parse_format(std::string_view name);
const char* to_string(Command c);

struct RunConfig {
  std::string model_path;
  Command command = Command::rg;
  std::string operator_name = "plus";
  OutputFormat format = OutputFormat::table;
  std::size_t oracle_bound = kDefaultOracleBound;
  /// isolate: both empty means the full single-fault matrix.
  std::vector<std::string> from_mode;
  std::vector<std::string> wrt_mode;
  /// residual: one equation set per residual; fused when there are several.
  std::vector<std::vector<std::string>> residual_sets;
  std::string target_fault;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitPrecondition = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitOracleMismatch = 3;

struct RunOutcome {
  int exit_status = kExitOk;
  std::string out;  ///< rendered result
  std::string err;  ///< diagnostics
};

/// Runs the configured analysis. Never throws for model or analysis errors;
/// they are reported through the outcome.
RunOutcome execute(const RunConfig& config);

/// Same, with the model file content supplied directly.
RunOutcome execute_text(const RunConfig& config, std::string_view model_text);

/// Aligned text table: columns separated by two spaces, a dashed rule under
/// the header, no trailing blanks.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// CSV with RFC 4180 quoting.
std::string render_csv(const std::vector<std::string>& header,
                       const std::vector<std::vector<std::string>>& rows);

}  // namespace structdiag
