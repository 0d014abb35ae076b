#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace tds {

// Base of every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs that violate an operation's preconditions (shape, sign, domain).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class DomainError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Requested derivative order above the evaluator cap.
class CapExceeded : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotARoot : public ValidationError {
public:
    using ValidationError::ValidationError;
};

class NotSupported : public Error {
public:
    using Error::Error;
};

// Numeric failures: the algorithm ran out of refinement, depth or samples.
class NumericError : public Error {
public:
    using Error::Error;
};

class BudgetExhausted : public NumericError {
public:
    BudgetExhausted(const std::string& what, double re_min = 0, double re_max = 0, double im_min = 0,
                    double im_max = 0)
        : NumericError(what), re_min(re_min), re_max(re_max), im_min(im_min), im_max(im_max) {}
    double re_min, re_max, im_min, im_max;
};

class BoundaryRoot : public NumericError {
public:
    BoundaryRoot(const std::string& what, std::complex<double> where)
        : NumericError(what), where(where) {}
    std::complex<double> where;
};

class NonIntegerWinding : public NumericError {
public:
    using NumericError::NumericError;
};

class ImaginaryAxisRoot : public NumericError {
public:
    ImaginaryAxisRoot(const std::string& what, std::complex<double> where)
        : NumericError(what), where(where) {}
    std::complex<double> where;
};

class MultipleRoot : public NumericError {
public:
    using NumericError::NumericError;
};

class InvariantRoot : public NumericError {
public:
    using NumericError::NumericError;
};

class UndecidedDirection : public NumericError {
public:
    using NumericError::NumericError;
};

class ValidationMismatch : public NumericError {
public:
    ValidationMismatch(const std::string& what, double tau, int predicted, int counted)
        : NumericError(what), tau(tau), predicted(predicted), counted(counted) {}
    double tau;
    int predicted;
    int counted;
};

}  // namespace tds
