#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sqzom::cli {

enum ExitCode : int {
  kOk = 0,
  kDomainError = 1,
  kUsageError = 2,
  kVerificationFailure = 3,
};

// Runs one command line (without the program name). Normal output goes to
// `out`; failures are reported on `err` as one JSON object per line, e.g.
//   {"error":"domain","message":"cooperativity must be > 0"}
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int main(int argc, char** argv);

std::vector<std::string> recipe_names();

}  // namespace sqzom::cli
