#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kicktop/io.hpp"

namespace kicktop {

/// Parses argv (flags override values from --config). Throws ConfigError on
/// invalid input. Returns std::nullopt when --help/--version was handled,
/// with the text written to `out`.
std::optional<RunConfig> parse_command_line(const std::vector<std::string>& args,
                                            std::ostream& out);

/// Executes a validated config: computes the payload, writes the CSV and,
/// for file outputs, the `<output>.meta.json` sidecar. Progress goes to
/// `log`. Throws IoError / std::runtime_error on failure.
RunMetadata run(const RunConfig& config, std::ostream& log);

/// Full front end with exit codes: 0 success, 1 runtime or I/O failure,
/// 2 invalid configuration.
int cli_main(int argc, const char* const* argv);

}  // namespace kicktop
