#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqz::cli {

enum ExitCode : int {
    kOk = 0,
    kVerifyFailed = 1,
    kUsage = 2,
    kNumeric = 3,
};

// Runs one command line (argv[0] is the program name). Tables go to `out`
// unless --out is given; diagnostics and summaries go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sqz::cli
