#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mapweld::cli {

// Exit codes: 0 success (including --help), 1 domain or I/O failure reported
// as one JSON line on `err`, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace mapweld::cli
