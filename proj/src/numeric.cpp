#include "kleinian/numeric.hpp"

#include "kleinian/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace kleinian {

namespace {
unsigned bits_to_digits10(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * 0.30102999566398120)) + 1;
}
}  // namespace

unsigned precision_bits() {
    return static_cast<unsigned>(std::ceil(Real::default_precision() / 0.30102999566398120));
}

unsigned bits_for_distance(double distance) {
    distance = std::max(0.0, distance);
    return 96 + static_cast<unsigned>(std::ceil((2.0 * distance + 60.0) / std::log(2.0)));
}

PrecisionGuard::PrecisionGuard(unsigned bits) : saved_digits10_(Real::default_precision()) {
    unsigned wanted = bits_to_digits10(bits);
    if (wanted > saved_digits10_) {
        Real::default_precision(wanted);
        changed_ = true;
    }
}

// Only a guard that raised the precision writes it back, so nested guards in
// worker threads never touch the process-wide setting.
PrecisionGuard::~PrecisionGuard() {
    if (changed_) Real::default_precision(saved_digits10_);
}

std::string format_real(const Real& x, int digits) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(digits - 1) << x;
    return os.str();
}

Vec refresh(const Vec& v) {
    Vec out(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) out(i) = Real(v(i), Real::default_precision());
    return out;
}

Mat refresh(const Mat& m) {
    Mat out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = Real(m(i, j), Real::default_precision());
    return out;
}

Vec basis_vector(int size, int index) {
    Vec v = Vec::Zero(size);
    v(index) = 1;
    return v;
}

const char* error_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::InvalidPoint: return "InvalidPoint";
        case ErrorCode::ZeroTangent: return "ZeroTangent";
        case ErrorCode::IntersectingGeodesics: return "IntersectingGeodesics";
        case ErrorCode::AsymptoticGeodesics: return "AsymptoticGeodesics";
        case ErrorCode::DegenerateFrame: return "DegenerateFrame";
        case ErrorCode::EmptyIntersection: return "EmptyIntersection";
        case ErrorCode::InvalidParameters: return "InvalidParameters";
        case ErrorCode::SeparationViolation: return "SeparationViolation";
        case ErrorCode::OrthogonalityViolation: return "OrthogonalityViolation";
        case ErrorCode::EmptyWord: return "EmptyWord";
        case ErrorCode::UnexpectedIntersectionDim: return "UnexpectedIntersectionDim";
        case ErrorCode::PerpendicularTooShort: return "PerpendicularTooShort";
        case ErrorCode::NoConvergence: return "NoConvergence";
        case ErrorCode::DepthTooLarge: return "DepthTooLarge";
        case ErrorCode::UnknownPlane: return "UnknownPlane";
        case ErrorCode::StreamEventuallyConstant: return "StreamEventuallyConstant";
        case ErrorCode::PoleCollision: return "PoleCollision";
        case ErrorCode::SizeCap: return "SizeCap";
        case ErrorCode::WrongDimension: return "WrongDimension";
        case ErrorCode::NoActiveFactors: return "NoActiveFactors";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Precondition: return "Precondition";
    }
    return "Unknown";
}

}  // namespace kleinian
