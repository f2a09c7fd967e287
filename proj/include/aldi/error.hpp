#pragma once

#include <stdexcept>
#include <string>

namespace aldi {

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration or command-line options.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input data that cannot be processed (missing columns, no usable rows, ...).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace aldi
