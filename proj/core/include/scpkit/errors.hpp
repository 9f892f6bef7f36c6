#pragma once

#include <stdexcept>
#include <string>

namespace scp {

/// Argument outside the mathematical domain of a function (negative K, alpha <= 2, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Input accepted by the math but outside the range an algorithm is validated for.
class UnsupportedRangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// The Rician SCP coefficient divides by a_hat^2; raised when the fitted a_hat is zero.
class SingularCoefficientError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Adaptive quadrature failed to reach its tolerance.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid user input (scenario files, datasets, sweep specs).
/// The message names the offending field, e.g. "layers[1].alpha: must be > 2".
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace scp
