#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "infers/error.hpp"

namespace infers::cli {

enum ExitCode : int {
    kOk = 0,
    kUsage = 2,        // bad flags or config
    kIo = 3,           // unreadable input, malformed CSV, unwritable output
    kNoMinima = 4,
    kNoFeasible = 5,
    kEstimation = 6,   // any other estimation failure
};

int exit_code_for(ErrorCode code);

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace infers::cli
