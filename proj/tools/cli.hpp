#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cogom::cli {

enum ExitCode : int { kOk = 0, kUserError = 1, kIoFailure = 2, kNumericalFailure = 3 };

/// Runs one invocation (args exclude the program name). Messages go to
/// `out` / `err`; the return value is the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cogom::cli
