#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relan::cli {

// Process exit codes.
enum ExitCode : int {
    kOk = 0,
    kInternal = 1,
    kUsage = 2,
    kData = 3,
    kBatteryMiss = 4,
    kIo = 5,
};

// Runs one command line (argv without the program name). Reports are written
// to the output directory; progress and summaries go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relan::cli
