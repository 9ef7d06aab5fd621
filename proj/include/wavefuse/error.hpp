#pragma once

#include <stdexcept>
#include <string>

namespace wavefuse {

enum class ErrorKind {
    Io,       // unreadable or unwritable file
    Format,   // unsupported or corrupt file contents
    Invalid,  // argument/precondition violation
    Numeric,  // solver failure, NaN/Inf detected
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

} // namespace wavefuse
