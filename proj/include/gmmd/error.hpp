#pragma once

#include <stdexcept>
#include <string>

namespace gmmd {

// Bad arguments: shapes, ranges, non-finite values, malformed files.
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

// The null-variance estimate is zero, so the test statistic cannot be standardized.
class DegenerateVarianceError : public std::runtime_error {
public:
    explicit DegenerateVarianceError(const std::string& what) : std::runtime_error(what) {}
};

// A closed-form population quantity was requested for a distribution that has none.
class UnsupportedOracleError : public std::runtime_error {
public:
    explicit UnsupportedOracleError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace gmmd
