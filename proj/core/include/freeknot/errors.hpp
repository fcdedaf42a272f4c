#pragma once

#include <stdexcept>
#include <string>

namespace freeknot {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Inconsistent inputs or experiment setup (resolution guard, regime
/// mismatch, misaligned arrays, unknown configuration keys).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A computation produced or received a non-finite value.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace freeknot
