#pragma once

#include <stdexcept>
#include <string>

namespace aida {

// Error categories map onto CLI exit codes: ConfigError -> 1, DataError -> 2,
// anything else -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad input data: unparsable files, schema mismatches, invalid values.
struct DataError : Error {
    using Error::Error;
};

// Inconsistent or out-of-range configuration (parameters, flags, specs).
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace aida
