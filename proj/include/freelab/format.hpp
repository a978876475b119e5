#pragma once

#include <charconv>
#include <cmath>
#include <string>

namespace freelab {

// Shortest round-trip decimal form; used in descriptors and labels.
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, x);
  return std::string(buffer, result.ptr);
}

}  // namespace freelab
