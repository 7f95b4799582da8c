#pragma once

#include <stdexcept>
#include <string>

namespace indist {

// Bad input data, unknown columns, malformed config. CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Numerical or convergence failure in a pipeline stage. CLI maps these to exit code 2.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace indist
