#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lcs {

// Parses "1..12", "1,3,5" or mixtures such as "1..3,7".
std::vector<std::int64_t> parse_k_list(const std::string& text);

// Entry point of the `lcsampler` tool. args[0] is the program name.
// Returns the process exit status.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace lcs
