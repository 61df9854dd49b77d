#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace seqcert::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one invocation. args excludes the program name. Scalar answers go to
/// out; logs, usage and errors go to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace seqcert::cli
