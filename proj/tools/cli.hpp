#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dbclock::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitRuntime = 2;

/// Runs `dbclock <args...>` in process. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dbclock::cli
