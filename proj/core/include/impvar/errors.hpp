#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace impvar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset()` is the byte offset of the problem.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Expression evaluated outside its domain (ln of a non-positive value,
/// negative base with fractional exponent, division by zero, ...).
class EvalError : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature did not reach the requested tolerance.
class QuadratureError : public Error {
public:
    QuadratureError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved_error() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Invalid problem description (bad partition, constants, file syntax).
class SpecError : public Error {
public:
    using Error::Error;
};

/// Root of the fibering map could not be bracketed or refined.
class FiberingError : public Error {
public:
    using Error::Error;
};

}  // namespace impvar
