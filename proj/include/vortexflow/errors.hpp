#pragma once

#include <stdexcept>
#include <string>

namespace vflow {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
   public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class GridMismatchError : public Error {
   public:
    using Error::Error;
};

class ComponentCountError : public Error {
   public:
    using Error::Error;
};

class ShapeError : public Error {
   public:
    using Error::Error;
};

class SymmetryError : public Error {
   public:
    using Error::Error;
};

// Input vorticity not divergence-free enough for the 3D Biot-Savart inverse.
class DivergenceToleranceError : public Error {
   public:
    DivergenceToleranceError(const std::string& what, double relative_divergence)
        : Error(what), relative_divergence(relative_divergence) {}
    double relative_divergence;
};

// Inner substep too large for the frozen advection speed.
class CflError : public Error {
   public:
    CflError(const std::string& what, int suggested_substeps)
        : Error(what), suggested_substeps(suggested_substeps) {}
    int suggested_substeps;
};

class EstimateRejectedError : public Error {
   public:
    EstimateRejectedError(const std::string& what, double aborted_fraction)
        : Error(what), aborted_fraction(aborted_fraction) {}
    double aborted_fraction;
};

class InsufficientDataError : public Error {
   public:
    using Error::Error;
};

class NestingError : public Error {
   public:
    using Error::Error;
};

class ConfigError : public Error {
   public:
    using Error::Error;
};

class IoError : public Error {
   public:
    using Error::Error;
};

}  // namespace vflow
