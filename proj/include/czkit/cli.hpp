#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace czkit {

/// Exit codes: 0 all checks pass, 1 some check failed, 2 usage, config or
/// domain error.
inline constexpr int kExitPass = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitError = 2;

/// The czkit command line. args[0] is the program name. Subcommands:
/// partition, kernel, solve, estimate, verify-symbol. Reports go to files
/// written atomically (temp file + rename); a one-line log per check goes
/// to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

/// Writes `data` to `path` through a temporary file in the same directory.
void write_atomic(const std::string& path, const std::string& data);

}  // namespace czkit
