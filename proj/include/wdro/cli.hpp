#pragma once

#include <iosfwd>

namespace wdro {

// Full command-line entry point. Returns the process exit code:
// 0 success, 1 validation error, 2 numerical failure. Errors are emitted as
// one-line JSON on `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wdro
