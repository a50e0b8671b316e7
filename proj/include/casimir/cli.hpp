#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace casimir::cli {

// Runs one CLI invocation. args excludes the program name. Output and
// diagnostics go to the supplied streams so tests can run in-process.
// Exit codes: 0 success, 2 usage/input error, 3 numeric or fit failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace casimir::cli
