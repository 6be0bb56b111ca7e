#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plastafem {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input to an operation (out-of-range ids, size mismatch, non-finite data).
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Degenerate or wrongly oriented triangle.
class InvalidElement : public Error {
public:
    using Error::Error;
};

/// Meshes that do not descend from the same root triangulation.
class IncompatibleRoot : public Error {
public:
    using Error::Error;
};

/// Linear solver did not reach its tolerance.
class SolverFailure : public Error {
public:
    SolverFailure(const std::string& what, double residual)
        : Error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

/// Outer alternating minimization hit its iteration cap.
class NonConvergence : public Error {
public:
    NonConvergence(const std::string& what, std::vector<double> energies)
        : Error(what), energies_(std::move(energies)) {}
    const std::vector<double>& energies() const { return energies_; }

private:
    std::vector<double> energies_;
};

class InsufficientData : public Error {
public:
    using Error::Error;
};

/// Every problem found while validating a configuration, not only the first.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> messages);
    const std::vector<std::string>& messages() const { return messages_; }

private:
    std::vector<std::string> messages_;
};

}  // namespace plastafem
