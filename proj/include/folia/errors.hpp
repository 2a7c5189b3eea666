#pragma once

#include <array>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "folia/geometry.hpp"

namespace folia {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "Error"; }
};

#define FOLIA_ERROR(Name)                                               \
    class Name : public Error {                                         \
    public:                                                             \
        using Error::Error;                                             \
        const char* kind() const noexcept override { return #Name; }    \
    }

FOLIA_ERROR(UnknownIdentifier);
FOLIA_ERROR(DomainError);
FOLIA_ERROR(NotTransverse);
FOLIA_ERROR(Degenerate);
FOLIA_ERROR(WindowTooSmall);
FOLIA_ERROR(SeedGap);
FOLIA_ERROR(NoCrossing);
FOLIA_ERROR(NotInSaturation);
FOLIA_ERROR(MismatchedArcs);
FOLIA_ERROR(ProductStructureFailure);
FOLIA_ERROR(ScaleTooLarge);
FOLIA_ERROR(QuadrantNotTrivial);
FOLIA_ERROR(NoFixedPoint);
FOLIA_ERROR(BadArc);
FOLIA_ERROR(NotCertified);
FOLIA_ERROR(InvalidInput);

#undef FOLIA_ERROR

// Orbit escape: either past the guard radius or into a finite-time singularity
// where the step size underflows.
class IntegrationError : public Error {
public:
    using Error::Error;
};

class BlowUp : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
    const char* kind() const noexcept override { return "BlowUp"; }
};

class StepFailure : public IntegrationError {
public:
    using IntegrationError::IntegrationError;
    const char* kind() const noexcept override { return "StepFailure"; }
};

class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }
    const char* kind() const noexcept override { return "SyntaxError"; }

private:
    std::size_t offset_;
};

// Three seeds whose leaves violate the separation property.
struct WitnessTriple {
    std::array<Vec2, 3> seeds;
};

class OrderUndefined : public Error {
public:
    OrderUndefined(const std::string& what, WitnessTriple w) : Error(what), witness_(w) {}
    const WitnessTriple& witness() const noexcept { return witness_; }
    const char* kind() const noexcept override { return "OrderUndefined"; }

private:
    WitnessTriple witness_;
};

}  // namespace folia
