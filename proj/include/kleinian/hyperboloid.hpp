#pragma once
// Geometry of H^m in the hyperboloid model: the upper sheet of <x,x> = -1
// in R^{m,1} with <x,y> = -x0*y0 + sum_i xi*yi.

#include "kleinian/numeric.hpp"

#include <variant>

namespace kleinian {

// Coordinates of R^{m,1}; the ambient hyperbolic dimension is size() - 1.
using MinkowskiVector = Vec;

inline constexpr double kInvariantTol = 1e-9;
inline constexpr double kGeometricTol = 1e-8;
inline constexpr double kClassifyTol = 1e-7;

Real mink_inner(const MinkowskiVector& x, const MinkowskiVector& y);
// Componentwise J*x with J = diag(-1, 1, ..., 1).
MinkowskiVector apply_J(const MinkowskiVector& x);

class HPoint {
public:
    // Validates <v,v> = -1 (relative to |v|^2) and v0 > 0.
    explicit HPoint(MinkowskiVector v);
    // Rescales a timelike future vector onto the sheet.
    static HPoint normalized(const MinkowskiVector& v);
    static HPoint origin(int m);

    const MinkowskiVector& v() const { return v_; }
    int ambient_dim() const { return static_cast<int>(v_.size()) - 1; }

private:
    struct Unchecked {};
    HPoint(MinkowskiVector v, Unchecked) : v_(std::move(v)) {}
    MinkowskiVector v_;
};

class Isometry {
public:
    // Validates M^T J M = J (relative to the squared entry scale) and M(0,0) > 0.
    explicit Isometry(Mat m);
    static Isometry identity(int m);
    // Wraps a matrix known to be an isometry up to rounding.
    static Isometry trusted(Mat m);

    const Mat& matrix() const { return m_; }
    int ambient_dim() const { return static_cast<int>(m_.rows()) - 1; }
    Isometry operator*(const Isometry& other) const;
    Isometry inverse() const;
    HPoint apply(const HPoint& p) const;
    MinkowskiVector apply(const MinkowskiVector& v) const { return m_ * v; }

private:
    struct Unchecked {};
    Isometry(Mat m, Unchecked) : m_(std::move(m)) {}
    Mat m_;
};

// max |(M^T J M - J)_{ij}|
Real lorentz_residual(const Mat& m);
// J-inverse of a Lorentz matrix: J M^T J.
Mat lorentz_inverse(const Mat& m);

class Geodesic {
public:
    // Validates <base,dir> = 0 and <dir,dir> = 1.
    Geodesic(HPoint base, MinkowskiVector dir);
    // The geodesic through p heading towards q (p != q).
    static Geodesic through(const HPoint& p, const HPoint& q);

    const HPoint& base() const { return base_; }
    const MinkowskiVector& dir() const { return dir_; }
    Geodesic transformed(const Isometry& g) const;
    Geodesic transformed(const Mat& g) const;

private:
    HPoint base_;
    MinkowskiVector dir_;
};

class GeodesicSubspace {
public:
    // Columns: one timelike then k spacelike vectors, J-orthonormal.
    explicit GeodesicSubspace(Mat basis);
    const Mat& basis() const { return basis_; }
    int dim() const { return static_cast<int>(basis_.cols()) - 1; }
    int ambient_dim() const { return static_cast<int>(basis_.rows()) - 1; }
    GeodesicSubspace transformed(const Mat& g) const;
    // Euclidean norm of the part of v outside the span, relative to |v|.
    Real containment_residual(const MinkowskiVector& v) const;

private:
    Mat basis_;
};

class BoundaryPoint {
public:
    // Validates |dir| = 1.
    explicit BoundaryPoint(Vec dir);
    // From any future null (or nearly null) vector: (1, x/x0).
    static BoundaryPoint from_null(const MinkowskiVector& v);
    const Vec& dir() const { return dir_; }
    int ambient_dim() const { return static_cast<int>(dir_.size()); }
    MinkowskiVector null_rep() const;

private:
    struct Unchecked {};
    BoundaryPoint(Vec dir, Unchecked) : dir_(std::move(dir)) {}
    Vec dir_;
};

Real chordal(const BoundaryPoint& a, const BoundaryPoint& b);
BoundaryPoint apply(const Isometry& g, const BoundaryPoint& xi);
BoundaryPoint apply(const Mat& g, const BoundaryPoint& xi);

Real dist(const HPoint& p, const HPoint& q);
HPoint geodesic_point(const Geodesic& g, const Real& t);
// Unit-speed tangent at p pointing at q (p != q).
MinkowskiVector tangent_towards(const HPoint& p, const HPoint& q);
Real angle_at(const HPoint& p, const MinkowskiVector& u, const MinkowskiVector& w);

struct Foot {
    HPoint foot;
    Real t;
};
Foot foot_of_perpendicular(const HPoint& p, const Geodesic& g);

struct CommonPerpendicular {
    HPoint a;
    HPoint b;
    Real length;
    Real t1;  // parameter of a on the first geodesic
    Real t2;  // parameter of b on the second geodesic
};
CommonPerpendicular common_perpendicular(const Geodesic& g1, const Geodesic& g2);

// True when both geodesics have the same point set: two points of g2 lie
// within hyperbolic distance ~tol of g1.
bool same_geodesic(const Geodesic& g1, const Geodesic& g2, double tol = kClassifyTol);

Isometry translation_along(const Geodesic& g, const Real& ell);
// Lorentz Gram-Schmidt on the columns.
Isometry reorthonormalize(const Mat& m);

BoundaryPoint boundary_endpoint(const Geodesic& g, int sign);

using SubspaceIntersection = std::variant<GeodesicSubspace, HPoint>;
SubspaceIntersection subspace_intersection(const GeodesicSubspace& s1, const GeodesicSubspace& s2);

// Multiplies isometries left to right, renormalizing every `period` factors.
class IsometryAccumulator {
public:
    explicit IsometryAccumulator(int m, int period = 64);
    void multiply_right(const Mat& g);
    const Mat& value() const { return acc_; }
    int compositions() const { return count_; }

private:
    Mat acc_;
    int period_;
    int count_ = 0;
};

}  // namespace kleinian
