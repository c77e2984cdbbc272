#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cheshire {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed arguments: bad labels, mismatched conventions, out-of-range indices.
class InputError : public Error {
public:
    using Error::Error;
};

/// Operation is undefined for the given value (e.g. normalizing the zero vector).
class DegenerateInputError : public Error {
public:
    using Error::Error;
};

/// Scenario parameters at a boundary where the construction breaks down.
class DegenerateScenarioError : public Error {
public:
    using Error::Error;
};

/// Pre- and post-selected states are (numerically) orthogonal.
class AnomalousSelectionError : public Error {
public:
    AnomalousSelectionError(const std::string& what, std::complex<double> overlap)
        : Error(what), overlap_(overlap) {}

    std::complex<double> overlap() const noexcept { return overlap_; }

private:
    std::complex<double> overlap_;
};

/// Weak-value constraints admit no nonzero post-selected state.
class InfeasibleTargetsError : public Error {
public:
    using Error::Error;
};

/// Every admissible post-selected state is orthogonal to the pre-selected state.
class VacuousSelectionError : public Error {
public:
    using Error::Error;
};

/// Inconsistent optical circuit (unbound ports, bad addressing, duplicate bindings).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

class CalibrationError : public Error {
public:
    CalibrationError(const std::string& what, double best_residual)
        : Error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// A file could not be read or written.
class IoError : public Error {
public:
    using Error::Error;
};

/// Text input could not be parsed; `line()` is 1-based, 0 when unknown.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace cheshire
