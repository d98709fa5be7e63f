#include "kleinian/hyperboloid.hpp"

#include "kleinian/errors.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

namespace kleinian {

namespace {

void require_same_size(const Vec& x, const Vec& y) {
    if (x.size() != y.size())
        throw Error(ErrorCode::DimensionMismatch,
                    "vectors of size " + std::to_string(x.size()) + " and " + std::to_string(y.size()));
}

Real max_abs(const Vec& v) {
    Real m = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) m = std::max(m, Real(abs(v(i))));
    return m;
}

Real max_abs(const Mat& a) {
    Real m = 0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j) m = std::max(m, Real(abs(a(i, j))));
    return m;
}

// Tolerance scaled to the square of the coordinate size: far from the
// origin the form is evaluated on entries of size e^D.
Real scaled_tol(const Real& scale) {
    Real s = std::max(Real(1), scale);
    return kInvariantTol * s * s;
}

// Cyclic Jacobi rotations; the Gram matrices here are at most (2n+1)^2.
void symmetric_eigen(Mat a, Vec& vals, Mat& vecs) {
    const Eigen::Index k = a.rows();
    vecs = Mat::Identity(k, k);
    for (int sweep = 0; sweep < 100; ++sweep) {
        Real off = 0, total = 0;
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) {
                total += a(i, j) * a(i, j);
                if (i != j) off += a(i, j) * a(i, j);
            }
        if (off <= total * std::numeric_limits<Real>::epsilon() * std::numeric_limits<Real>::epsilon()) break;
        for (Eigen::Index p = 0; p < k; ++p)
            for (Eigen::Index q = p + 1; q < k; ++q) {
                if (a(p, q) == 0) continue;
                Real theta = (a(q, q) - a(p, p)) / (2 * a(p, q));
                Real t = (theta >= 0 ? Real(1) : Real(-1)) / (abs(theta) + sqrt(theta * theta + 1));
                Real c = 1 / sqrt(t * t + 1), s = t * c;
                for (Eigen::Index r = 0; r < k; ++r) {
                    Real arp = a(r, p), arq = a(r, q);
                    a(r, p) = c * arp - s * arq;
                    a(r, q) = s * arp + c * arq;
                }
                for (Eigen::Index r = 0; r < k; ++r) {
                    Real apr = a(p, r), aqr = a(q, r);
                    a(p, r) = c * apr - s * aqr;
                    a(q, r) = s * apr + c * aqr;
                }
                for (Eigen::Index r = 0; r < k; ++r) {
                    Real vrp = vecs(r, p), vrq = vecs(r, q);
                    vecs(r, p) = c * vrp - s * vrq;
                    vecs(r, q) = s * vrp + c * vrq;
                }
            }
    }
    vals = a.diagonal();
}

}  // namespace

Real mink_inner(const MinkowskiVector& x, const MinkowskiVector& y) {
    require_same_size(x, y);
    Real s = -x(0) * y(0);
    for (Eigen::Index i = 1; i < x.size(); ++i) s += x(i) * y(i);
    return s;
}

MinkowskiVector apply_J(const MinkowskiVector& x) {
    MinkowskiVector y = x;
    y(0) = -y(0);
    return y;
}

// ---------------------------------------------------------------- HPoint

HPoint::HPoint(MinkowskiVector v) : v_(std::move(v)) {
    if (v_.size() < 2) throw Error(ErrorCode::InvalidPoint, "ambient dimension must be at least 1");
    Real n = mink_inner(v_, v_);
    if (abs(n + 1) > scaled_tol(max_abs(v_)) || v_(0) <= 0)
        throw Error(ErrorCode::InvalidPoint, "vector is not on the upper sheet (<v,v> = " + format_real(n) + ")");
}

HPoint HPoint::normalized(const MinkowskiVector& v) {
    Real n = mink_inner(v, v);
    if (n >= 0 || v(0) <= 0) throw Error(ErrorCode::InvalidPoint, "vector is not future timelike");
    // When <v,v> + 1 is at the rounding level of the pairing itself, v is
    // already on the sheet to working precision. Rescaling would then only
    // inject that rounding as a relative error of size e^{2D} ulp, which
    // destroys cancellations such as b - d for a far geodesic.
    Real scale = std::max(Real(1), max_abs(v));
    Real noise = scale * scale * static_cast<double>(v.size()) * ldexp(Real(1), 8 - static_cast<int>(precision_bits()));
    if (abs(n + 1) <= noise) return HPoint(v, Unchecked{});
    return HPoint(MinkowskiVector(v / sqrt(-n)), Unchecked{});
}

HPoint HPoint::origin(int m) {
    if (m < 1) throw Error(ErrorCode::InvalidPoint, "ambient dimension must be at least 1");
    return HPoint(basis_vector(m + 1, 0), Unchecked{});
}

// -------------------------------------------------------------- Isometry

Real lorentz_residual(const Mat& m) {
    Mat j = Mat::Identity(m.rows(), m.cols());
    j(0, 0) = -1;
    Mat r = m.transpose() * j * m - j;
    return max_abs(r);
}

Mat lorentz_inverse(const Mat& m) {
    Mat inv = m.transpose();
    inv.row(0) = -inv.row(0);
    inv.col(0) = -inv.col(0);
    return inv;
}

Isometry::Isometry(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols() || m_.rows() < 2)
        throw Error(ErrorCode::DimensionMismatch, "isometry matrix must be square of size >= 2");
    Real res = lorentz_residual(m_);
    if (res > scaled_tol(max_abs(m_)))
        throw Error(ErrorCode::InvalidParameters, "matrix does not preserve the Lorentz form (residual " +
                                                      format_real(res) + ")");
    if (m_(0, 0) <= 0) throw Error(ErrorCode::InvalidParameters, "matrix swaps the sheets of the hyperboloid");
}

Isometry Isometry::identity(int m) { return Isometry(Mat::Identity(m + 1, m + 1), Unchecked{}); }

Isometry Isometry::trusted(Mat m) { return Isometry(std::move(m), Unchecked{}); }

Isometry Isometry::operator*(const Isometry& other) const {
    if (m_.rows() != other.m_.rows()) throw Error(ErrorCode::DimensionMismatch, "composing isometries");
    return Isometry(Mat(m_ * other.m_), Unchecked{});
}

Isometry Isometry::inverse() const { return Isometry(lorentz_inverse(m_), Unchecked{}); }

HPoint Isometry::apply(const HPoint& p) const {
    if (p.v().size() != m_.rows()) throw Error(ErrorCode::DimensionMismatch, "applying isometry");
    return HPoint::normalized(m_ * p.v());
}

// -------------------------------------------------------------- Geodesic

Geodesic::Geodesic(HPoint base, MinkowskiVector dir) : base_(std::move(base)), dir_(std::move(dir)) {
    require_same_size(base_.v(), dir_);
    Real scale = std::max(max_abs(base_.v()), max_abs(dir_));
    if (abs(mink_inner(base_.v(), dir_)) > scaled_tol(scale) || abs(mink_inner(dir_, dir_) - 1) > scaled_tol(scale))
        throw Error(ErrorCode::InvalidParameters, "geodesic direction is not a unit tangent at the base point");
}

Geodesic Geodesic::through(const HPoint& p, const HPoint& q) {
    return Geodesic(p, tangent_towards(p, q));
}

Geodesic Geodesic::transformed(const Mat& g) const {
    HPoint b = HPoint::normalized(g * base_.v());
    // No re-projection or rescaling of d: both would turn the e^{2D} ulp
    // rounding of the pairings into absolute errors of size e^{3D} ulp.
    MinkowskiVector d = g * dir_;
    return Geodesic(std::move(b), std::move(d));
}

Geodesic Geodesic::transformed(const Isometry& g) const { return transformed(g.matrix()); }

// ------------------------------------------------------ GeodesicSubspace

GeodesicSubspace::GeodesicSubspace(Mat basis) : basis_(std::move(basis)) {
    if (basis_.cols() < 1) throw Error(ErrorCode::InvalidParameters, "subspace basis is empty");
    Mat j = Mat::Identity(basis_.rows(), basis_.rows());
    j(0, 0) = -1;
    Mat gram = basis_.transpose() * j * basis_;
    Mat expect = Mat::Identity(basis_.cols(), basis_.cols());
    expect(0, 0) = -1;
    if (max_abs(Mat(gram - expect)) > scaled_tol(max_abs(basis_)))
        throw Error(ErrorCode::InvalidParameters, "subspace basis is not J-orthonormal");
    if (basis_(0, 0) < 0) basis_.col(0) = -basis_.col(0);
}

GeodesicSubspace GeodesicSubspace::transformed(const Mat& g) const { return GeodesicSubspace(Mat(g * basis_)); }

Real GeodesicSubspace::containment_residual(const MinkowskiVector& v) const {
    MinkowskiVector proj = -mink_inner(v, basis_.col(0)) * basis_.col(0);
    for (Eigen::Index k = 1; k < basis_.cols(); ++k) proj += mink_inner(v, basis_.col(k)) * basis_.col(k);
    Real nv = v.norm();
    if (nv == 0) return 0;
    return Real((v - proj).norm() / nv);
}

// --------------------------------------------------------- BoundaryPoint

BoundaryPoint::BoundaryPoint(Vec dir) : dir_(std::move(dir)) {
    if (dir_.size() < 1) throw Error(ErrorCode::InvalidParameters, "boundary point needs a direction");
    if (abs(dir_.norm() - 1) > kInvariantTol)
        throw Error(ErrorCode::InvalidParameters, "boundary direction is not a unit vector");
}

BoundaryPoint BoundaryPoint::from_null(const MinkowskiVector& v) {
    Vec d = v.tail(v.size() - 1);
    Real n = d.norm();
    if (n == 0) throw Error(ErrorCode::InvalidParameters, "vector has no spatial part");
    return BoundaryPoint(Vec(d / n), Unchecked{});
}

MinkowskiVector BoundaryPoint::null_rep() const {
    MinkowskiVector v(dir_.size() + 1);
    v(0) = 1;
    v.tail(dir_.size()) = dir_;
    return v;
}

Real chordal(const BoundaryPoint& a, const BoundaryPoint& b) {
    require_same_size(a.dir(), b.dir());
    return (a.dir() - b.dir()).norm();
}

BoundaryPoint apply(const Mat& g, const BoundaryPoint& xi) { return BoundaryPoint::from_null(g * xi.null_rep()); }

BoundaryPoint apply(const Isometry& g, const BoundaryPoint& xi) { return apply(g.matrix(), xi); }

// ------------------------------------------------------------ operations

Real dist(const HPoint& p, const HPoint& q) {
    // Chord form: acosh(-<p,q>) loses half the digits for nearby points far
    // from O, while the Lorentz length of p - q is computed from small
    // component differences.
    MinkowskiVector diff = p.v() - q.v();
    Real chord2 = mink_inner(diff, diff);
    if (chord2 <= 0) return Real(0);
    return 2 * asinh(sqrt(chord2) / 2);
}

HPoint geodesic_point(const Geodesic& g, const Real& t) {
    return HPoint::normalized(g.base().v() * cosh(t) + g.dir() * sinh(t));
}

MinkowskiVector tangent_towards(const HPoint& p, const HPoint& q) {
    MinkowskiVector u = q.v() + mink_inner(p.v(), q.v()) * p.v();
    Real n = mink_inner(u, u);
    if (n <= 0) throw Error(ErrorCode::ZeroTangent, "points coincide; no tangent direction");
    return u / sqrt(n);
}

Real angle_at(const HPoint& p, const MinkowskiVector& u, const MinkowskiVector& w) {
    require_same_size(p.v(), u);
    require_same_size(p.v(), w);
    // Project onto the tangent space first so rounding in u, w cannot leak
    // a timelike component into the angle.
    MinkowskiVector uu = u + mink_inner(u, p.v()) * p.v();
    MinkowskiVector ww = w + mink_inner(w, p.v()) * p.v();
    Real nu = mink_inner(uu, uu), nw = mink_inner(ww, ww);
    if (nu <= 0 || nw <= 0) throw Error(ErrorCode::ZeroTangent, "zero tangent vector");
    Real c = mink_inner(uu, ww) / sqrt(nu * nw);
    c = std::clamp(c, Real(-1), Real(1));
    return acos(c);
}

Foot foot_of_perpendicular(const HPoint& p, const Geodesic& g) {
    require_same_size(p.v(), g.base().v());
    Real a = -mink_inner(p.v(), g.base().v());
    Real b = mink_inner(p.v(), g.dir());
    // -<p, g(t)> = a cosh t - b sinh t, minimized at tanh t = b / a.
    Real t = atanh(b / a);
    return Foot{geodesic_point(g, t), t};
}

bool same_geodesic(const Geodesic& g1, const Geodesic& g2, double tol) {
    // sinh of the distance from a point p to g1 is the Lorentz length of the
    // part of p orthogonal to span(base, dir). A Euclidean residual would
    // shrink like e^-D for geodesics far from O and report distinct far
    // geodesics as equal.
    auto off = [&](const MinkowskiVector& p) {
        MinkowskiVector w = p + mink_inner(p, g1.base().v()) * g1.base().v() - mink_inner(p, g1.dir()) * g1.dir();
        Real n = mink_inner(w, w);
        return n <= 0 ? Real(0) : Real(sqrt(n));
    };
    const Real t(tol);
    return off(g2.base().v()) < t && off(geodesic_point(g2, Real(1)).v()) < t;
}

CommonPerpendicular common_perpendicular(const Geodesic& g1, const Geodesic& g2) {
    require_same_size(g1.base().v(), g2.base().v());
    if (same_geodesic(g1, g2)) throw Error(ErrorCode::IntersectingGeodesics, "geodesics coincide");
    MinkowskiVector p1p = g1.base().v() + g1.dir(), p1m = g1.base().v() - g1.dir();
    MinkowskiVector p2p = g2.base().v() + g2.dir(), p2m = g2.base().v() - g2.dir();
    // With g(t) = (e^t p+ + e^-t p-)/2 the Lorentz pairing of two geodesic
    // points is a sum of four exponentials in t1 +- t2 with these weights.
    Real P = -mink_inner(p1p, p2p), Q = -mink_inner(p1p, p2m);
    Real R = -mink_inner(p1m, p2p), S = -mink_inner(p1m, p2m);
    Real ps = P * S, qr = Q * R;
    if (P <= 0 || Q <= 0 || R <= 0 || S <= 0 || ps < kClassifyTol * qr || qr < kClassifyTol * ps)
        throw Error(ErrorCode::AsymptoticGeodesics, "geodesics share an ideal endpoint");
    Real fmin = (sqrt(ps) + sqrt(qr)) / 2;
    Real length = fmin <= 1 ? Real(0) : Real(acosh(fmin));
    if (length < kClassifyTol) throw Error(ErrorCode::IntersectingGeodesics, "geodesics intersect");
    Real x = log(S / P) / 2;
    Real y = log(R / Q) / 2;
    Real t1 = (x + y) / 2, t2 = (x - y) / 2;
    return CommonPerpendicular{geodesic_point(g1, t1), geodesic_point(g2, t2), length, t1, t2};
}

Isometry translation_along(const Geodesic& g, const Real& ell) {
    const MinkowskiVector& b = g.base().v();
    const MinkowskiVector& d = g.dir();
    Real ch = cosh(ell), sh = sinh(ell);
    // x = alpha b + beta d + x_perp with alpha = -<x,b>, beta = <x,d>.
    MinkowskiVector cb = (ch - 1) * b + sh * d;
    MinkowskiVector cd = sh * b + (ch - 1) * d;
    Mat m = Mat::Identity(b.size(), b.size());
    m += cb * (-apply_J(b)).transpose();
    m += cd * apply_J(d).transpose();
    return Isometry::trusted(std::move(m));
}

Isometry reorthonormalize(const Mat& m) {
    if (m.rows() != m.cols() || m.rows() < 2)
        throw Error(ErrorCode::DimensionMismatch, "reorthonormalize needs a square matrix");
    Mat q = m;
    const Eigen::Index size = q.rows();
    for (Eigen::Index k = 0; k < size; ++k) {
        MinkowskiVector c = q.col(k);
        for (Eigen::Index j = 0; j < k; ++j) {
            Real sign = j == 0 ? Real(-1) : Real(1);
            c -= (mink_inner(c, q.col(j)) / sign) * q.col(j);
        }
        Real n = mink_inner(c, c);
        bool timelike = k == 0;
        if ((timelike && n > -1e-8) || (!timelike && n < 1e-8))
            throw Error(ErrorCode::DegenerateFrame, "basis vector " + std::to_string(k) + " collapsed");
        c /= sqrt(abs(n));
        if (timelike && c(0) < 0) c = -c;
        q.col(k) = c;
    }
    return Isometry::trusted(std::move(q));
}

BoundaryPoint boundary_endpoint(const Geodesic& g, int sign) {
    MinkowskiVector v = g.base().v() + Real(sign >= 0 ? 1 : -1) * g.dir();
    return BoundaryPoint::from_null(v);
}

SubspaceIntersection subspace_intersection(const GeodesicSubspace& s1, const GeodesicSubspace& s2) {
    if (s1.ambient_dim() != s2.ambient_dim())
        throw Error(ErrorCode::DimensionMismatch, "subspaces live in different ambient spaces");
    const Mat& b1 = s1.basis();
    const Mat& b2 = s2.basis();
    Mat stacked(b1.rows(), b1.cols() + b2.cols());
    stacked << b1, -b2;
    Eigen::FullPivLU<Mat> lu(stacked);
    lu.setThreshold(Real(1e-20));
    Mat kernel = lu.kernel();
    if (lu.dimensionOfKernel() == 0) throw Error(ErrorCode::EmptyIntersection, "spans meet only at 0");
    Mat w = b1 * kernel.topRows(b1.cols());
    Mat j = Mat::Identity(w.rows(), w.rows());
    j(0, 0) = -1;
    Mat gram = w.transpose() * j * w;
    Vec vals;
    Mat vecs;
    symmetric_eigen(gram, vals, vecs);
    Real scale = 0;
    for (Eigen::Index i = 0; i < vals.size(); ++i) scale = std::max(scale, Real(abs(vals(i))));
    Real thresh = scale * Real(1e-20);
    std::vector<MinkowskiVector> spacelike;
    std::optional<MinkowskiVector> timelike;
    for (Eigen::Index i = 0; i < vals.size(); ++i) {
        MinkowskiVector v = w * vecs.col(i);
        if (vals(i) < -thresh) {
            if (timelike) throw Error(ErrorCode::EmptyIntersection, "intersection has two timelike directions");
            timelike = v / sqrt(-vals(i));
        } else if (vals(i) > thresh) {
            spacelike.push_back(v / sqrt(vals(i)));
        }
    }
    if (!timelike) throw Error(ErrorCode::EmptyIntersection, "spans share no timelike direction");
    if ((*timelike)(0) < 0) *timelike = -*timelike;
    if (spacelike.empty()) return HPoint::normalized(*timelike);
    Mat basis(w.rows(), static_cast<Eigen::Index>(spacelike.size()) + 1);
    basis.col(0) = *timelike;
    for (size_t k = 0; k < spacelike.size(); ++k) basis.col(static_cast<Eigen::Index>(k) + 1) = spacelike[k];
    return GeodesicSubspace(std::move(basis));
}

// --------------------------------------------------- IsometryAccumulator

IsometryAccumulator::IsometryAccumulator(int m, int period) : acc_(Mat::Identity(m + 1, m + 1)), period_(period) {}

void IsometryAccumulator::multiply_right(const Mat& g) {
    acc_ = acc_ * g;
    if (++count_ % period_ == 0) acc_ = reorthonormalize(acc_).matrix();
}

}  // namespace kleinian
