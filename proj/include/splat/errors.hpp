#pragma once

#include <stdexcept>
#include <string>

namespace splat {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Syntax or semantic error in a model or suite file.
class ParseError : public Error {
public:
    ParseError(const std::string& what, int line, int column)
        : Error("line " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

/// Raised when get_valid would enumerate past its cap.
class EnumerationCapError : public Error {
public:
    EnumerationCapError(std::size_t cap, std::size_t reached)
        : Error("valid-configuration enumeration exceeded cap of " + std::to_string(cap) +
                " (found at least " + std::to_string(reached) + ")"),
          cap_(cap),
          reached_(reached) {}

    std::size_t cap() const { return cap_; }
    std::size_t reached() const { return reached_; }

private:
    std::size_t cap_;
    std::size_t reached_;
};

}  // namespace splat
