#ifndef NILDERIV_CLI_HPP
#define NILDERIV_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nilderiv/json_io.hpp"

namespace nilderiv {

/// Exit codes: a true verdict or success, a false verdict, bad input.
inline constexpr int kExitTrue = 0;
inline constexpr int kExitFalse = 1;
inline constexpr int kExitInput = 2;

/// Runs the `nilderiv` command line (args exclude the program name). The
/// JSON report goes to `out`; errors and the human summary go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct SelftestResult {
    Json report;
    bool passed = false;
};

/// Randomized end-to-end checks over small rings; the check order and all
/// random inputs are fixed by the seed.
SelftestResult selftest(std::uint64_t seed);

}  // namespace nilderiv

#endif  // NILDERIV_CLI_HPP
