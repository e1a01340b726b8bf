#pragma once

#include <stdexcept>
#include <string>

namespace cled {

/// Malformed or inconsistent input data (files, samples, schemas).
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller violated an operation precondition (bad dimensions, empty input,
/// out-of-range index). The CLI maps this to exit code 1.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A bounded search exhausted its attempt budget (non-termination guard).
/// The CLI maps this to exit code 3.
class GuardLimitError : public std::runtime_error {
public:
    explicit GuardLimitError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace cled
