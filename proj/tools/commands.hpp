#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace segsweep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace segsweep::cli
