#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace advreal::harness {

inline constexpr int kExitOk = 0;
inline constexpr int kExitModule = 1;
inline constexpr int kExitUsage = 2;

/// Entry point of the advreal tool. `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace advreal::harness
