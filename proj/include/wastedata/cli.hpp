#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace wastedata::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsage = 2;

// Environment variable naming the default rules file.
inline constexpr const char* kRulesEnv = "WASTEDATA_RULES";

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace wastedata::cli
