#pragma once

#include <string>

namespace narrownet {

/// Round-trip decimal form of a double (shortest representation).
std::string format_double(double value);

}  // namespace narrownet
