#pragma once

#include <string>
#include <string_view>

namespace gpsearch {

/// Shortest decimal text that parses back to exactly the same double.
/// Used for landscape and trace files so write/load round trips are exact.
std::string format_exact(double v);

/// 6-significant-digit formatting for statistics outputs.
std::string format_stat(double v);

/// Strict double parser: the whole token must be consumed.
double parse_double(std::string_view token);

/// Strict nonnegative integer parser.
long long parse_integer(std::string_view token);

std::string_view trim(std::string_view s);

}  // namespace gpsearch
