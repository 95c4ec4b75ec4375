#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace jshop {

inline constexpr const char* kToolVersion = "0.1.0";

// Command-line front end. Exit codes: 0 success, 1 instance/file parse error,
// 2 configuration error, 3 training aborted on non-finite values.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace jshop
