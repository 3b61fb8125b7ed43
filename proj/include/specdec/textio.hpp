#pragma once

#include <string>

namespace specdec {

// Shortest round-trip decimal form of a double (via std::to_chars), so
// serialized values are byte-stable across runs and parse back exactly.
std::string format_double(double value);

}  // namespace specdec
