#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dssl::cli {

enum ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kInternalError = 3,
};

/// Entry point shared by the executable and the tests. `args` excludes the program name.
/// `in` backs `--input -`; reports and JSONL go to `out` unless --output names a file.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace dssl::cli
