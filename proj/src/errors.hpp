#pragma once

#include <stdexcept>
#include <string>

namespace maxq {

/// Rejected input: bad parameters, malformed specifiers, domain violations.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical procedure did not reach its tolerance (quadrature, linear solve).
class NumericFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace maxq
