#pragma once

#include <stdexcept>
#include <string>

namespace kernelflow {

/// Input outside the domain of an operation (unknown point, space mismatch,
/// invalid probability masses).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An operation was called on a value that does not satisfy its documented
/// precondition (e.g. relative entropy of an incoherent pair).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// An increment of the form inf - inf was requested.
class IndeterminateError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace kernelflow
