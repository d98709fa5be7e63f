#pragma once
#include <stdexcept>
#include <string>

namespace kleinian {

enum class ErrorCode {
    DimensionMismatch,
    InvalidPoint,
    ZeroTangent,
    IntersectingGeodesics,
    AsymptoticGeodesics,
    DegenerateFrame,
    EmptyIntersection,
    InvalidParameters,
    SeparationViolation,
    OrthogonalityViolation,
    EmptyWord,
    UnexpectedIntersectionDim,
    PerpendicularTooShort,
    NoConvergence,
    DepthTooLarge,
    UnknownPlane,
    StreamEventuallyConstant,
    PoleCollision,
    SizeCap,
    WrongDimension,
    NoActiveFactors,
    ParseError,
    IoError,
    Precondition,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(error_name(code)) + ": " + message), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace kleinian
