#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ucbf::cli {

/// Exit codes: 0 pass, 1 usage or config error, 2 verdict FAIL, 3 premise violation.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ucbf::cli
