#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace resonance {

// Base of everything thrown by this library. name() is the stable
// machine-readable identifier printed by the CLI diagnostic stream.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& message)
        : std::runtime_error(message), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

// Bad input or configuration: CLI exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Numerical failure at run time: CLI exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

struct ScenarioError : ValidationError {
    explicit ScenarioError(const std::string& m) : ValidationError("ScenarioError", m) {}
};

struct DimensionMismatch : ValidationError {
    explicit DimensionMismatch(const std::string& m) : ValidationError("DimensionMismatch", m) {}
};

struct AsymmetryError : ValidationError {
    explicit AsymmetryError(const std::string& m) : ValidationError("AsymmetryError", m) {}
};

struct InvalidArgument : ValidationError {
    explicit InvalidArgument(const std::string& m) : ValidationError("InvalidArgument", m) {}
};

struct WindowRequired : ValidationError {
    explicit WindowRequired(const std::string& m) : ValidationError("WindowRequired", m) {}
};

struct WindowEmpty : ValidationError {
    explicit WindowEmpty(const std::string& m) : ValidationError("WindowEmpty", m) {}
};

// Raised when an eigenvector is self-orthogonal under the c-product, i.e. the
// decomposition sits on a branch point and the biorthogonal expansion is invalid.
// Carries the coalescing eigenvalue pair.
struct EPDegenerate : NumericalError {
    EPDegenerate(const std::string& m, std::complex<double> a, std::complex<double> b)
        : NumericalError("EPDegenerate", m), z1(a), z2(b) {}
    std::complex<double> z1;
    std::complex<double> z2;
};

struct NotConverged : NumericalError {
    explicit NotConverged(const std::string& m) : NumericalError("NotConverged", m) {}
};

struct BranchLost : NumericalError {
    explicit BranchLost(const std::string& m) : NumericalError("BranchLost", m) {}
};

struct SingularResolvent : NumericalError {
    explicit SingularResolvent(const std::string& m) : NumericalError("SingularResolvent", m) {}
};

struct AllZero : NumericalError {
    explicit AllZero(const std::string& m) : NumericalError("AllZero", m) {}
};

struct Underflow : NumericalError {
    explicit Underflow(const std::string& m) : NumericalError("Underflow", m) {}
};

struct DomainError : NumericalError {
    explicit DomainError(const std::string& m) : NumericalError("DomainError", m) {}
};

struct StepTooLarge : NumericalError {
    explicit StepTooLarge(const std::string& m) : NumericalError("StepTooLarge", m) {}
};

struct HorizonExceeded : NumericalError {
    explicit HorizonExceeded(const std::string& m) : NumericalError("HorizonExceeded", m) {}
};

struct NotFound : NumericalError {
    explicit NotFound(const std::string& m) : NumericalError("NotFound", m) {}
};

} // namespace resonance
