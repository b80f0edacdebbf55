#pragma once

#include <stdexcept>
#include <string>

namespace hostility {

/// Bad flags, unknown names, invalid parameter values. The CLI maps these to exit code 1.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or insufficient input data. The CLI maps these to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hostility
