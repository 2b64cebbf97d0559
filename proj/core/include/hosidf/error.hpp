#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace hosidf {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed model description (bad coefficients, dimensions, gamma range).
class SchemaError : public Error {
public:
    using Error::Error;
};

// Numerical failure. Carries the offending frequencies (rad/s) when known.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what, std::vector<double> omegas = {})
        : Error(what), omegas_(std::move(omegas)) {}
    const std::vector<double>& omegas() const { return omegas_; }

private:
    std::vector<double> omegas_;
};

class RangeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class SingularityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NotSettledError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace hosidf
