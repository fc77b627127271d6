#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

// Base class for all library errors. The CLI maps subclasses to exit codes:
// regime/calibration -> 1, usage/argument -> 2.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what) : std::runtime_error(what) {}
};

// Bad argument values, insufficient data, malformed input.
class argument_error : public error {
public:
    using error::error;
};

// A formula was asked outside the parameter regime it is valid in
// (e.g. delta too large for a PAC bound, or an infeasible step-size cap).
class regime_error : public error {
public:
    using error::error;
};

// Empirical calibration could not satisfy its constraints.
class calibration_error : public error {
public:
    using error::error;
};

// Non-finite values, singular matrices, diverged paths.
class numerical_error : public error {
public:
    using error::error;
};

// A requested capability is not registered for the given object
// (e.g. exact stationary sampling for a model without a sampler).
class unsupported_error : public error {
public:
    using error::error;
};

}  // namespace ergolab
