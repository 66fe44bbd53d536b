#pragma once

#include <charconv>
#include <string>

namespace mbp::detail {

// Shortest representation that parses back to the same double.
inline std::string format_double(double value) {
  char buffer[32];
  auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

}  // namespace mbp::detail
