#pragma once

#include <stdexcept>
#include <string>

namespace dyadnet {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad flags, scheme strings, parameter combinations.
struct ConfigError : Error {
    using Error::Error;
};

// Bad files, schemas, shapes, container contents.
struct DataError : Error {
    using Error::Error;
};

} // namespace dyadnet
