#pragma once

#include <stdexcept>
#include <string>

namespace nessqfi {

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public std::invalid_argument {
public:
    explicit PreconditionError(const std::string& what) : std::invalid_argument(what) {}
};

/// A computation ran but its result failed an internal consistency check
/// (singular system, non-converged derivative, residual too large, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace nessqfi
