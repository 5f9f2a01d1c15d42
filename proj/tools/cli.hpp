#pragma once

#include <ostream>

namespace flowrec::cli {

/// Exit codes: 0 success, 2 invalid input, 3 solver failure, 4 disconnected network.
enum ExitCode : int { kOk = 0, kValidation = 2, kSolver = 3, kDisconnected = 4 };

/// Runs the flowrec command line with the given arguments (argv[0] is the program name).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace flowrec::cli
