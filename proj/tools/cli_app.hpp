#pragma once

#include <ostream>

namespace hodmd::cli {

enum ExitCode : int {
    kOk = 0,
    kToleranceFailure = 1,  // also non-convergence and numerical failures
    kUsageError = 2,
    kIoError = 3,
};

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace hodmd::cli
