#pragma once

#include <stdexcept>
#include <string>

namespace magniglyph {

/// Raised when a file cannot be read, decoded, or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an input violates a documented precondition or schema.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace magniglyph
