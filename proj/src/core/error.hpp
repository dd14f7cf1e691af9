#pragma once

#include <stdexcept>
#include <string>

namespace slab {

// Error taxonomy maps onto the library's status codes (see shortcutlab.h):
// config/usage/domain -> 2, io/format -> 3, numeric -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad values or shapes handed to an operation.
struct DomainError : Error {
    using Error::Error;
};

// API misuse: wrong call sequence, invalid configuration values.
struct UsageError : Error {
    using Error::Error;
};

// Filesystem and OS-level failures; message carries the path.
struct IoError : Error {
    using Error::Error;
};

// A file exists but its bytes are not what the parser expects.
struct FormatError : Error {
    using Error::Error;
};

// NaN/Inf escaped into a training run.
struct NumericError : Error {
    using Error::Error;
};

}  // namespace slab
