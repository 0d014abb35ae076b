#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tds::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kValidation = 2, kNumeric = 3 };

// Runs one command line (without the program name). Results go to `out`
// unless --output names a file; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Worker count: --threads (0 = hardware) capped by TDS_THREADS when set.
unsigned resolve_threads(unsigned requested);

}  // namespace tds::cli
