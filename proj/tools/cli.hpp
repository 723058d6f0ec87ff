#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wombat::cli {

/// Exit codes; 0 means no error path was taken.
enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kUsage = 2,
    kGrammar = 3,
    kCatalog = 4,
    kStore = 5,
    kPipeline = 6,
    kAnalysis = 7,
};

/// Runs one command line (`args[0]` is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace wombat::cli
