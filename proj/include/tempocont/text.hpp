#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tempocont::text {

/// %.17g: enough digits for an exact double round trip.
std::string format_double(double x);

/// Strict parse of a whole token; throws ParseError tagged with `line`.
double parse_double(std::string_view token, std::size_t line = 0);
std::int64_t parse_int(std::string_view token, std::size_t line = 0);
std::uint64_t parse_uint(std::string_view token, std::size_t line = 0);

std::vector<std::string_view> split(std::string_view s, char sep);
std::string_view trim(std::string_view s);

/// Writes `contents` to a sibling temp file and renames it into place.
void write_file_atomic(const std::string& path, const std::string& contents);

} // namespace tempocont::text
