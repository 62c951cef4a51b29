#pragma once

#include <stdexcept>
#include <string>

namespace c3sim {

// Error taxonomy mirrors the CLI exit codes: IoError -> 2,
// UnknownEntityError -> 3, ValidationError -> 4, FitError -> 5.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

struct UnknownEntityError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

struct FitError : Error {
    using Error::Error;
};

}  // namespace c3sim
