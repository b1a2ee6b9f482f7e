#pragma once

#include <stdexcept>
#include <string>

namespace embeval {

// Bad user input (malformed files, invalid flags, contract violations on
// data supplied from outside). CLI maps these to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A condition that should be unreachable when the library is used within
// its contracts. CLI maps these to exit code 1.
struct InternalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace embeval
