#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cfopt::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitStalled = 4;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "CFOPT_OUTPUT_DIR";

/// Entry point shared by the executable and the tests. args excludes argv[0].
/// Progress goes to `out`; failures are reported on `err` as one JSON object.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Full-precision (17 significant digits) decimal rendering.
std::string format_double(double v);

}  // namespace cfopt::cli
