#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hhlab {

struct CliInvocation {
  std::string command;  // coeffs, simulate, classify, energy-audit, green-check, atlas
  /// Flag name without leading dashes -> raw value. Values from the config
  /// file are merged in for keys not given on the command line.
  std::map<std::string, std::string> flags;
  std::optional<std::string> config_path;
  /// --help was requested; `usage` holds the text and nothing else runs.
  bool help = false;
  std::string usage;
};

/// Parses arguments (program name excluded). Throws InvalidArgument with a
/// one-line diagnostic naming the offending flag or config key.
CliInvocation parse_invocation(const std::vector<std::string>& args);

/// Runs the invocation. Data go to `out` (or the --out file), diagnostics to
/// `err`. Returns 0, 1 for usage errors, 2 for numerical failures.
int execute(const CliInvocation& invocation, std::ostream& out, std::ostream& err, bool out_is_tty = false);

/// parse_invocation + execute with the exit-status mapping applied to parse
/// errors too.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, bool out_is_tty = false);

}  // namespace hhlab
