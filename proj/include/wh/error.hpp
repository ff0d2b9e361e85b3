#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wh {

// Base of all library errors. Two families matter to callers: InputError
// (malformed problem data, exit code 2 in the CLI) and NumericError
// (a numeric procedure could not finish, exit code 3).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class InputError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

// Syntax error in an expression or problem file; offset is a 0-based
// byte position into the offending text.
class ParseError : public InputError {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : InputError(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// Division by zero, pole hit, or other pointwise evaluation failure.
class EvalError : public NumericError {
public:
    using NumericError::NumericError;
};

// Path tracking could not proceed (step underflow or ambiguous branch).
class TrackingError : public NumericError {
public:
    using NumericError::NumericError;
};

// Evaluation point too close to a cut or branch affix; callers should
// perturb the point and retry.
class NearCutError : public NumericError {
public:
    using NumericError::NumericError;
};

// The surface violates a structural assumption (affix at the origin,
// identically vanishing radicand, tower too wide).
class SurfaceError : public NumericError {
public:
    using NumericError::NumericError;
};

// An operation was invoked outside its mathematical domain of validity,
// e.g. basic bypass matrices of an unbalanced surface.
class PreconditionError : public NumericError {
public:
    using NumericError::NumericError;
};

// Rational reconstruction did not reach the required residual.
class ReconstructionError : public NumericError {
public:
    ReconstructionError(const std::string& msg, double best_residual)
        : NumericError(msg), best_residual_(best_residual) {}
    double best_residual() const { return best_residual_; }

private:
    double best_residual_;
};

} // namespace wh
