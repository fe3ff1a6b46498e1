#pragma once

#include <stdexcept>
#include <string>

namespace airfl {

/// Invalid argument or violated precondition on an input value.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Input outside the mathematical domain of a function (e.g. E1 at x <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Scheme asked to run in a configuration it does not model (e.g. M != 1
/// for truncated channel inversion).
class UnsupportedConfiguration : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An equalizer with b^H h_k == 0 for a device that must be served.
class DegenerateEqualizer : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Step-size or parameter conditions required by a convergence bound.
class PreconditionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace airfl
