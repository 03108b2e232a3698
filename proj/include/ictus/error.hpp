#pragma once

#include <stdexcept>
#include <string>

namespace ictus {

// Bad input: malformed files, out-of-range parameters, contract violations
// by the caller. The CLI maps these to exit code 2.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// File system failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ictus
