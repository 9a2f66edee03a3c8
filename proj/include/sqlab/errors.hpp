#pragma once

#include <stdexcept>
#include <string>

namespace sqlab {

/// A point (or a stencil point) fell outside the open domain of a function.
class OutOfDomain : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A parameter is outside its admissible range (b <= 1, y not in (0,2), ...).
class BadParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A scale parameter is below twice the spacing of a grid-sampled function.
class ScaleTooFine : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A structural precondition of a validator does not hold (e.g. S_0 != 0).
class PreconditionFailed : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Quadrature refinement or band recursion hit its limit. The best
/// estimate reached so far is carried along.
class NoConvergence : public std::runtime_error {
public:
    NoConvergence(const std::string& what, double partial)
        : std::runtime_error(what), partial_(partial) {}

    double partial() const noexcept { return partial_; }

private:
    double partial_;
};

}  // namespace sqlab
