#include "gpsearch/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <system_error>

#include "gpsearch/errors.hpp"

namespace gpsearch {

std::string format_exact(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw ValidationError("failed to format value");
  return std::string(buf, ptr);
}

std::string format_stat(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return std::string(buf);
}

std::string_view trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

double parse_double(std::string_view token) {
  auto t = trim(token);
  double v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ValidationError("not a number: '" + std::string(token) + "'");
  }
  return v;
}

long long parse_integer(std::string_view token) {
  auto t = trim(token);
  long long v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size()) {
    throw ValidationError("not an integer: '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace gpsearch
