#pragma once

#include <stdexcept>
#include <string>

namespace bodet {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// data validation
struct NonpositiveEpsilon : Error { using Error::Error; };
struct PoleInLowerHalfPlane : Error { using Error::Error; };
struct DuplicatePole : Error { using Error::Error; };

// phase evaluation
struct PoleHit : Error { using Error::Error; };
struct PathCrossesCut : Error { using Error::Error; };

// contour construction
struct GeometryInfeasible : Error { using Error::Error; };
struct SingularityTooClose : Error { using Error::Error; };

// quadrature
struct NonIntegrableEndpoint : Error { using Error::Error; };
struct NonFiniteIntegrand : Error { using Error::Error; };

// linear algebra
struct SingularB : Error { using Error::Error; };

// special functions
struct DomainError : Error { using Error::Error; };
struct OrderTooLarge : Error { using Error::Error; };

// configuration / CLI
struct ConfigError : Error { using Error::Error; };

} // namespace bodet
