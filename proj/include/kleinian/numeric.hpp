#pragma once
// Scalar and linear-algebra types shared by every geometric module.
//
// Far-away points of the hyperboloid have coordinates of size e^D, so the
// scalar is a variable-precision MPFR float. Precision is a process-wide
// setting that callers raise with PrecisionGuard before building values.

#include <boost/multiprecision/eigen.hpp>
#include <boost/multiprecision/mpfr.hpp>

#include <Eigen/Dense>

#include <string>

namespace kleinian {

using Real = boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>,
                                           boost::multiprecision::et_off>;
using Vec = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

// Bits of working precision currently in effect for newly created values.
unsigned precision_bits();

// Precision needed to resolve unit-scale relative geometry between points
// up to `distance` away from the origin, with ~60 bits to spare.
unsigned bits_for_distance(double distance);

// Raises (never lowers) the working precision for its lifetime.
class PrecisionGuard {
public:
    explicit PrecisionGuard(unsigned bits);
    ~PrecisionGuard();
    PrecisionGuard(const PrecisionGuard&) = delete;
    PrecisionGuard& operator=(const PrecisionGuard&) = delete;

private:
    unsigned saved_digits10_;
    bool changed_ = false;
};

inline double to_double(const Real& x) { return x.convert_to<double>(); }
inline long double to_long_double(const Real& x) { return x.convert_to<long double>(); }

// Scientific rendering with `digits` significant digits; works far outside
// the double exponent range.
std::string format_real(const Real& x, int digits = 6);

// Re-creates a vector/matrix at the current working precision.
Vec refresh(const Vec& v);
Mat refresh(const Mat& m);

Vec basis_vector(int size, int index);

}  // namespace kleinian
