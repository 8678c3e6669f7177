#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace milo::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,  // usage and validation errors
  kIo = 3,
  kOracleCap = 4,
};

// Runs one invocation. args[0] is the program name. Errors are written to
// `err` as a single line "error[<code>]: <message>".
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace milo::cli
