#pragma once

#include <ostream>

namespace loras::cli {

enum ExitCode : int {
    kOk = 0,
    kInputError = 2,
    kSamplerError = 3,
    kValidationFailed = 4,
    kUsageError = 64,
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace loras::cli
