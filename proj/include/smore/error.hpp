#pragma once

#include <stdexcept>
#include <string>

namespace smore {

/// Bad user-supplied parameter or configuration. CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data. CLI maps this to exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace smore
