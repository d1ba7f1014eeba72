#pragma once

#include <stdexcept>
#include <string>

namespace liborforge {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Violations of type invariants and operation preconditions.
class InvariantError : public Error {
public:
    using Error::Error;
};

class DomainError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

class IndexError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// Mismatched conventions, e.g. a bounded truncation handed to an identity-only routine.
class ContractError : public InvariantError {
public:
    using InvariantError::InvariantError;
};

// Numerical failures: overflow, blow-up, unattainable calibration targets.
class NumericalError : public Error {
public:
    using Error::Error;
};

class RangeError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    DivergenceError(const std::string& what, double blowup_time)
        : NumericalError(what), blowup_time_(blowup_time) {}
    double blowup_time() const noexcept { return blowup_time_; }

private:
    double blowup_time_;
};

class CalibrationError : public NumericalError {
public:
    CalibrationError(const std::string& what, double attainable_sup)
        : NumericalError(what), attainable_sup_(attainable_sup) {}
    double attainable_sup() const noexcept { return attainable_sup_; }

private:
    double attainable_sup_;
};

class SimulationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

// Malformed spec documents; path is a JSON pointer to the offending field.
class SchemaError : public Error {
public:
    SchemaError(const std::string& path, const std::string& message)
        : Error(path + ": " + message), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace liborforge
