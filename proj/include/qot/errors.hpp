#pragma once

#include <stdexcept>
#include <string>

namespace qot {

// Base for all recoverable input/contract violations raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define QOT_ERROR_KIND(Name)                                      \
    class Name : public Error {                                  \
    public:                                                       \
        Name() : Error(#Name) {}                                  \
        explicit Name(const std::string& msg) : Error(std::string(#Name) + ": " + msg) {} \
    }

// measures
QOT_ERROR_KIND(NegativeWeight);
QOT_ERROR_KIND(LengthMismatch);
QOT_ERROR_KIND(EmptySupport);
QOT_ERROR_KIND(ZeroTotalMass);
QOT_ERROR_KIND(AllZeroDensity);
QOT_ERROR_KIND(NonpositiveRadius);
QOT_ERROR_KIND(MissingDensityBounds);

// costs
QOT_ERROR_KIND(DimensionMismatch);
QOT_ERROR_KIND(NonFiniteCost);
QOT_ERROR_KIND(ZeroRadius);
QOT_ERROR_KIND(MissingModulus);

// dual core
QOT_ERROR_KIND(ZeroWeightCell);
QOT_ERROR_KIND(TOutOfRange);

// solvers
QOT_ERROR_KIND(StepSizeOutOfRange);
QOT_ERROR_KIND(NonFiniteIterate);
QOT_ERROR_KIND(ZeroWeights);
QOT_ERROR_KIND(MissingReference);

// constants
QOT_ERROR_KIND(MissingGeometry);
QOT_ERROR_KIND(COmegaLessThanOne);
QOT_ERROR_KIND(ReferenceNotOptimal);

// spectral
QOT_ERROR_KIND(ROutOfRange);
QOT_ERROR_KIND(RSampleOutOfRange);
QOT_ERROR_KIND(SingularGram);

// oracle
QOT_ERROR_KIND(InstanceTooLarge);
QOT_ERROR_KIND(InfeasibleMarginals);

// io / cli
QOT_ERROR_KIND(BadFileFormat);

#undef QOT_ERROR_KIND

}  // namespace qot
