#pragma once

#include <stdexcept>

namespace msgat {

// Bad run configuration (CLI exit code 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad or inconsistent dataset (CLI exit code 3).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss during optimization (CLI exit code 4).
struct DivergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace msgat
