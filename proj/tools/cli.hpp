#pragma once

#include <string>
#include <vector>

namespace lobforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point of the command-line tool; args excludes the program name.
int run(const std::vector<std::string>& args);

}  // namespace lobforge::cli
