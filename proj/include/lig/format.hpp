#pragma once

#include <string>

namespace lig {

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

double parse_double(const std::string& s);
long parse_long(const std::string& s);

}  // namespace lig
