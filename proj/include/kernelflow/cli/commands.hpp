#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace kernelflow::cli {

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int semantic = 1;
inline constexpr int parse = 2;
inline constexpr int tolerance = 3;
inline constexpr int indeterminate = 4;
}  // namespace exit_code

struct Environment {
    /// Value of KERNELFLOW_THREADS, if set.
    std::optional<std::string> threads;
};

/// Runs `kernelflow <args...>` (args excludes the program name) and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err, const Environment& env = {});

/// "%.9g", with "inf" for +infinity.
std::string format_number(double value);

}  // namespace kernelflow::cli
