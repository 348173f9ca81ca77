#include "tempocont/text.hpp"

#include "tempocont/error.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <system_error>

namespace tempocont::text {

std::string format_double(double x) {
    char buf[40];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

namespace {

template <typename T>
T parse_number(std::string_view token, std::size_t line, const char* kind) {
    token = trim(token);
    T value{};
    const char* first = token.data();
    const char* last = token.data() + token.size();
    if (!token.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (token.empty() || ec != std::errc() || ptr != last)
        throw ParseError("expected " + std::string(kind) + ", got '" + std::string(token) + "'", line);
    return value;
}

} // namespace

double parse_double(std::string_view token, std::size_t line) { return parse_number<double>(token, line, "a number"); }

std::int64_t parse_int(std::string_view token, std::size_t line) {
    return parse_number<std::int64_t>(token, line, "an integer");
}

std::uint64_t parse_uint(std::string_view token, std::size_t line) {
    return parse_number<std::uint64_t>(token, line, "a non-negative integer");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        if (pos == std::string_view::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + tmp + "' for writing");
        out << contents;
        out.flush();
        if (!out) throw IoError("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "': " + ec.message());
}

} // namespace tempocont::text
