#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace permlab {

// Exit codes, stable across releases: 0 success, 1 findings-with-failures
// (failed scenario expectation, partial scan), 2 usage or configuration
// error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFindings = 1;
inline constexpr int kExitUsage = 2;

// The whole command-line surface, callable in-process for tests. argv-style
// arguments without the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace permlab
