#pragma once

#include <stdexcept>
#include <string>

namespace wde {

/// Base error for everything this library reports. Messages are meant to be
/// shown to the user as-is, so callers prefix them with enough context
/// (input line numbers, commit ids, pipeline stage) to act on.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ParseError : Error {
    ParseError(std::size_t line, const std::string& msg)
        : Error("line " + std::to_string(line) + ": " + msg), line_number(line) {}
    std::size_t line_number;
};

}  // namespace wde
