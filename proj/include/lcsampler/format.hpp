#pragma once

#include <string>

namespace lcs {

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

}  // namespace lcs

#include <cstdint>
#include <string_view>

namespace lcs {

// 64-bit FNV-1a, printed by the CLI as a file checksum.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

std::string hex64(std::uint64_t value);

}  // namespace lcs
