#include "kleinian/path_builder.hpp"

#include "kleinian/errors.hpp"
#include "kleinian/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace kleinian {

namespace {

Real real_L() { return 2 * acosh(2 * sqrt(Real(2))) + 1; }

// Pieces shorter than this are rounding residue of exact coincidences
// (e.g. a foot that is the junction point itself) and are collapsed.
Real collapse_threshold() { return Real(1e-20); }

std::optional<Geodesic> local_junction(const Configuration& c, const Plane& a, const Plane& b) {
    SubspaceIntersection inter = subspace_intersection(c.plane(a), c.plane(b));
    if (std::holds_alternative<HPoint>(inter)) return std::nullopt;
    const GeodesicSubspace& s = std::get<GeodesicSubspace>(inter);
    if (s.dim() > 1)
        throw Error(ErrorCode::UnexpectedIntersectionDim, "planes " + a + " and " + b + " meet in dimension " +
                                                              std::to_string(s.dim()));
    MinkowskiVector dir = s.basis().col(1);
    HPoint o = c.base();
    dir += mink_inner(dir, o.v()) * o.v();
    dir /= sqrt(mink_inner(dir, dir));
    return Geodesic(o, dir);
}

bool same_point(const HPoint& a, const HPoint& b) { return a.v() == b.v(); }

// Two pieces meeting at a lift O~ can be collinear and fold back on each
// other (e.g. b -> O~ and O~ -> a on the same junction geodesic with a
// between b and O~). The fold is homotopic to the single segment b -> a,
// which is what the construction's short segment is.
void merge_backtracking_pieces(PiecewisePath& p, const Real& three_L) {
    std::vector<PathSegment> merged;
    merged.reserve(p.segments.size());
    for (PathSegment& s : p.segments) {
        if (!merged.empty()) {
            PathSegment& prev = merged.back();
            if (prev.end_is_lift) {
                const HPoint& v = prev.end;
                Real ang = angle_at(v, tangent_towards(v, prev.start), tangent_towards(v, s.end));
                if (ang < Real(1)) {
                    PathSegment m{prev.start, s.end, dist(prev.start, s.end)};
                    m.role = s.role;
                    m.syllable = s.syllable;
                    m.end_is_lift = s.end_is_lift;
                    m.kind = m.length >= three_L ? SegmentKind::Long : SegmentKind::Short;
                    m.plane = s.plane;
                    prev = std::move(m);
                    continue;
                }
            }
        }
        merged.push_back(std::move(s));
    }
    p.segments = std::move(merged);
}

}  // namespace

Real PiecewisePath::total_length() const {
    Real t = 0;
    for (const auto& s : segments) t += s.length;
    return t;
}

unsigned path_precision_bits(const Configuration& c, const Word& w, int periods) {
    return bits_for_distance(std::max(1, periods) * c.word_length_bound(w) + 20.0);
}

bool is_right_or_straight(const Real& angle, double tol) {
    Real pi = boost::math::constants::pi<Real>();
    return abs(angle - pi / 2) <= tol || abs(angle - pi) <= tol;
}

// ------------------------------------------------------------- raw path

PiecewisePath build_raw_path(const Configuration& c, const Itinerary& it, int periods) {
    if (it.empty()) throw Error(ErrorCode::EmptyWord, "itinerary is empty");
    if (periods < 1) throw Error(ErrorCode::InvalidParameters, "periods must be >= 1");
    for (size_t i = 0; i < it.size(); ++i) {
        const Syllable& s = it[i];
        if (s.subword.empty()) throw Error(ErrorCode::InvalidParameters, "empty syllable");
        c.plane(s.plane);
        validate_word(s.subword, c.n());
        for (const Letter& l : s.subword)
            if (!letter_fits(l, s.plane))
                throw Error(ErrorCode::InvalidParameters, "letter " + format_letter(l) + " does not fit plane " + s.plane);
        if (i > 0 && it[i - 1].plane == s.plane)
            throw Error(ErrorCode::InvalidParameters, "consecutive syllables share plane " + s.plane);
    }
    Itinerary seq;
    for (int p = 0; p < periods; ++p)
        for (const Syllable& s : it) {
            if (!seq.empty() && seq.back().plane == s.plane)
                seq.back().subword.insert(seq.back().subword.end(), s.subword.begin(), s.subword.end());
            else
                seq.push_back(s);
        }

    PiecewisePath path;
    path.m = c.ambient_dim();
    path.precision_bits = bits_for_distance(periods * c.word_length_bound(concatenate(it)) + 20.0);
    PrecisionGuard guard(path.precision_bits);
    const HPoint o = c.base();
    IsometryAccumulator acc(c.ambient_dim());
    path.lifts.push_back(o);
    for (size_t i = 0; i < seq.size(); ++i) {
        Mat step = c.word_isometry(seq[i].subword);
        Mat before = acc.value();
        acc.multiply_right(step);
        path.lifts.push_back(HPoint::normalized(acc.value() * o.v()));
        const HPoint& a = path.lifts[i];
        const HPoint& b = path.lifts[i + 1];
        PathSegment seg{a, b, dist(a, b)};
        seg.kind = SegmentKind::Raw;
        seg.role = SegmentRole::Raw;
        seg.syllable = static_cast<int>(i);
        seg.end_is_lift = true;
        seg.plane = c.plane(seq[i].plane).transformed(before);
        path.segments.push_back(std::move(seg));
        path.syllables.push_back(SyllableFrame{seq[i].plane, seq[i].subword, std::move(before), std::move(step)});
        path.cases.push_back(SurgeryCase::Keep);
    }
    recompute_junctions(path);
    return path;
}

JunctionType classify_junction(const Configuration& c, const PiecewisePath& raw, int i) {
    if (i < 1 || i >= static_cast<int>(raw.syllables.size()))
        throw Error(ErrorCode::InvalidParameters, "junction index out of range");
    PrecisionGuard guard(raw.precision_bits);
    const auto& prev = raw.syllables[static_cast<size_t>(i - 1)];
    const auto& next = raw.syllables[static_cast<size_t>(i)];
    std::optional<Geodesic> local = local_junction(c, prev.plane, next.plane);
    if (!local) return PointIntersection{raw.lifts[static_cast<size_t>(i)]};
    // Consecutive carriers are G_i(Sigma_prev) and G_i(Sigma_next).
    Geodesic g = local->transformed(next.before);
    return GeodesicIntersection{Geodesic(raw.lifts[static_cast<size_t>(i)], g.dir())};
}

// ------------------------------------------------------------- surgery

PiecewisePath replace_segments(const Configuration& c, const PiecewisePath& raw) {
    PrecisionGuard guard(raw.precision_bits);
    PiecewisePath out;
    out.m = raw.m;
    out.precision_bits = raw.precision_bits;
    out.syllables = raw.syllables;
    out.lifts = raw.lifts;
    const Real three_L = 3 * real_L();
    const HPoint o = c.base();
    const size_t K = raw.syllables.size();

    for (size_t i = 0; i < K; ++i) {
        const SyllableFrame& syl = raw.syllables[i];
        const Mat& g = syl.step;
        std::optional<Geodesic> gs, ge;
        if (i > 0) gs = local_junction(c, raw.syllables[i - 1].plane, syl.plane);
        if (i + 1 < K) {
            auto j = local_junction(c, syl.plane, raw.syllables[i + 1].plane);
            if (j) ge = j->transformed(g);
        }
        const HPoint end_local = HPoint::normalized(g * o.v());

        // Local pieces: interior points and the role of the piece ending there.
        std::vector<HPoint> interior;
        std::vector<SegmentRole> roles;
        SurgeryCase kase = SurgeryCase::Keep;
        if (gs && ge) {
            Geodesic delta = gs->transformed(g);
            if (same_geodesic(*gs, delta)) {
                kase = SurgeryCase::Case2Degenerate;
                roles = {SegmentRole::AlongStart};
            } else {
                kase = SurgeryCase::Case2;
                CommonPerpendicular cp = [&] {
                    try {
                        return common_perpendicular(*gs, delta);
                    } catch (const Error& e) {
                        throw Error(ErrorCode::PerpendicularTooShort,
                                    "syllable " + std::to_string(i) + ": junction geodesic meets its translate (" +
                                        e.what() + ")");
                    }
                }();
                if (cp.length < three_L)
                    throw Error(ErrorCode::PerpendicularTooShort,
                                "syllable " + std::to_string(i) + ": common perpendicular of length " +
                                    format_real(cp.length) + " < 3L");
                out.perpendicular_lengths.push_back(cp.length);
                interior = {cp.a, cp.b};
                roles = {SegmentRole::AlongStart, SegmentRole::Perpendicular, SegmentRole::AlongEnd};
            }
        } else if (gs) {
            kase = SurgeryCase::Case1;
            interior = {foot_of_perpendicular(end_local, *gs).foot};
            roles = {SegmentRole::AlongStart, SegmentRole::Perpendicular};
        } else if (ge) {
            kase = SurgeryCase::MirrorCase1;
            interior = {foot_of_perpendicular(o, *ge).foot};
            roles = {SegmentRole::Perpendicular, SegmentRole::AlongEnd};
        } else {
            roles = {SegmentRole::Raw};
        }
        out.cases.push_back(kase);

        // Map to global coordinates; the lifts themselves are kept bit-exact.
        std::vector<HPoint> pts{raw.lifts[i]};
        std::vector<SegmentRole> piece_roles;
        for (size_t k = 0; k < interior.size(); ++k) {
            HPoint p = HPoint::normalized(syl.before * interior[k].v());
            if (dist(pts.back(), p) < collapse_threshold()) continue;
            pts.push_back(std::move(p));
            piece_roles.push_back(roles[k]);
        }
        const HPoint& last = raw.lifts[i + 1];
        if (pts.size() > 1 && dist(pts.back(), last) < collapse_threshold()) {
            pts.pop_back();
            piece_roles.pop_back();
        }
        pts.push_back(last);
        piece_roles.push_back(roles.back());

        for (size_t k = 0; k + 1 < pts.size(); ++k) {
            PathSegment seg{pts[k], pts[k + 1], dist(pts[k], pts[k + 1])};
            seg.role = kase == SurgeryCase::Keep ? SegmentRole::Raw : piece_roles[k];
            seg.syllable = static_cast<int>(i);
            seg.end_is_lift = k + 2 == pts.size();
            seg.kind = kase == SurgeryCase::Keep ? SegmentKind::Raw
                                                 : (seg.length >= three_L ? SegmentKind::Long : SegmentKind::Short);
            if (kase == SurgeryCase::Keep) seg.plane = raw.segments[i].plane;
            out.segments.push_back(std::move(seg));
        }
    }
    merge_backtracking_pieces(out, three_L);
    recompute_junctions(out);
    return out;
}

PiecewisePath repartition(const PiecewisePath& path) {
    PrecisionGuard guard(path.precision_bits);
    PiecewisePath out = path;
    out.segments.clear();
    const Real three_L = 3 * real_L();
    for (const PathSegment& seg : path.segments) {
        if (seg.length < three_L) {
            PathSegment s = seg;
            s.kind = SegmentKind::Short;
            out.segments.push_back(std::move(s));
            continue;
        }
        long chunks = static_cast<long>(floor(seg.length / three_L).convert_to<double>());
        chunks = std::max(1L, chunks);
        if (chunks == 1) {
            PathSegment s = seg;
            s.kind = SegmentKind::Long;
            out.segments.push_back(std::move(s));
            continue;
        }
        MinkowskiVector u = tangent_towards(seg.start, seg.end);
        HPoint prev = seg.start;
        for (long q = 1; q <= chunks; ++q) {
            bool last = q == chunks;
            Real t = three_L * q;
            HPoint next = last ? seg.end : HPoint::normalized(seg.start.v() * cosh(t) + u * sinh(t));
            Real len = last ? Real(seg.length - three_L * (chunks - 1)) : three_L;
            PathSegment s{prev, next, len};
            s.kind = SegmentKind::Long;
            s.role = seg.role;
            s.syllable = seg.syllable;
            s.end_is_lift = last && seg.end_is_lift;
            s.plane = seg.plane;
            out.segments.push_back(std::move(s));
            prev = next;
        }
    }
    recompute_junctions(out);
    return out;
}

void recompute_junctions(PiecewisePath& path) {
    PrecisionGuard guard(path.precision_bits);
    path.junctions.clear();
    for (size_t k = 0; k + 1 < path.segments.size(); ++k) {
        const PathSegment& a = path.segments[k];
        const PathSegment& b = path.segments[k + 1];
        const HPoint& p = a.end;
        Real angle = angle_at(p, tangent_towards(p, a.start), tangent_towards(p, b.end));
        path.junctions.push_back(Junction{p, angle, a.end_is_lift});
    }
}

HPoint point_at(const PiecewisePath& path, const Real& s) {
    Real acc = 0;
    for (const PathSegment& seg : path.segments) {
        if (s <= acc + seg.length || &seg == &path.segments.back()) {
            Real t = std::clamp(Real(s - acc), Real(0), seg.length);
            if (t == 0) return seg.start;
            if (t == seg.length) return seg.end;
            MinkowskiVector u = tangent_towards(seg.start, seg.end);
            return HPoint::normalized(seg.start.v() * cosh(t) + u * sinh(t));
        }
        acc += seg.length;
    }
    throw Error(ErrorCode::InvalidParameters, "empty path");
}

// ------------------------------------------------------- certification

QuasiGeodesicCertificate certify_quasigeodesic(const PiecewisePath& path, int pair_samples, std::uint64_t seed,
                                               int threads) {
    if (path.segments.empty()) throw Error(ErrorCode::InvalidParameters, "empty path");
    if (pair_samples < 1) throw Error(ErrorCode::InvalidParameters, "pair_samples must be >= 1");
    PrecisionGuard guard(path.precision_bits);
    QuasiGeodesicCertificate cert;
    cert.L = constant_L();
    cert.A = constant_A();
    cert.B = constant_B();
    cert.seed = seed;
    const long double A = cert.A, B = cert.B;

    std::vector<const HPoint*> verts;
    std::vector<long double> svals;
    long double acc = 0;
    verts.push_back(&path.segments.front().start);
    svals.push_back(0);
    for (const auto& seg : path.segments) {
        acc += to_long_double(seg.length);
        verts.push_back(&seg.end);
        svals.push_back(acc);
    }
    cert.total_length = static_cast<double>(acc);

    struct Best {
        long double margin = std::numeric_limits<long double>::infinity();
        long double upper = std::numeric_limits<long double>::infinity();
        long double sa = 0, sb = 0;
    };
    auto measure = [&](const HPoint& p, const HPoint& q, long double sa, long double sb, Best& best) {
        long double x = to_long_double(Real(-mink_inner(p.v(), q.v())));
        long double d = x <= 1 ? 0.0L : std::acosh(x);
        long double len = std::fabs(sb - sa);
        long double margin = d - (len / A - B);
        long double upper = A * len + B - d;
        if (margin < best.margin) {
            best.margin = margin;
            best.sa = sa;
            best.sb = sb;
        }
        best.upper = std::min(best.upper, upper);
    };

    const size_t nv = verts.size();
    std::vector<Best> rows(nv);
    parallel_for(nv, threads, [&](size_t i) {
        for (size_t j = i + 1; j < nv; ++j) measure(*verts[i], *verts[j], svals[i], svals[j], rows[i]);
    });

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, static_cast<double>(acc));
    std::vector<std::pair<double, double>> params(static_cast<size_t>(pair_samples));
    for (auto& pr : params) {
        pr.first = unif(rng);
        pr.second = unif(rng);
    }
    std::vector<Best> randoms(params.size());
    parallel_for(params.size(), threads, [&](size_t k) {
        HPoint p = point_at(path, Real(params[k].first));
        HPoint q = point_at(path, Real(params[k].second));
        measure(p, q, params[k].first, params[k].second, randoms[k]);
    });

    Best worst;
    auto fold = [&](const Best& b) {
        if (b.margin < worst.margin) {
            worst.margin = b.margin;
            worst.sa = b.sa;
            worst.sb = b.sb;
        }
        worst.upper = std::min(worst.upper, b.upper);
    };
    for (const auto& b : rows) fold(b);
    for (const auto& b : randoms) fold(b);
    cert.samples = static_cast<long>(nv * (nv - 1) / 2 + params.size());
    cert.worst_margin = static_cast<double>(worst.margin);
    cert.worst_upper_slack = static_cast<double>(worst.upper);
    cert.worst_s_a = static_cast<double>(worst.sa);
    cert.worst_s_b = static_cast<double>(worst.sb);
    cert.endpoints_distance = to_double(dist(*verts.front(), *verts.back()));
    return cert;
}

// ----------------------------------------------------------- bisectors

namespace {

// Unit normal of the perpendicular bisector hyperplane of [p, q].
MinkowskiVector bisector_normal(const HPoint& p, const HPoint& q) {
    MinkowskiVector n = p.v() - q.v();
    return n / sqrt(mink_inner(n, n));
}

double hyperplane_distance(const MinkowskiVector& n1, const MinkowskiVector& n2) {
    Real c = abs(mink_inner(n1, n2));
    return c <= 1 ? 0.0 : to_double(acosh(c));
}

}  // namespace

std::vector<BisectorSeparation> bisector_separation_details(const PiecewisePath& path) {
    PrecisionGuard guard(path.precision_bits);
    std::vector<BisectorSeparation> out;
    int prev_long = -1;
    for (size_t k = 0; k < path.segments.size(); ++k) {
        const PathSegment& seg = path.segments[k];
        if (seg.kind != SegmentKind::Long) continue;
        if (prev_long >= 0) {
            const PathSegment& prev = path.segments[static_cast<size_t>(prev_long)];
            BisectorSeparation b;
            b.first = prev_long;
            b.second = static_cast<int>(k);
            MinkowskiVector n2 = bisector_normal(seg.start, seg.end);
            if (prev_long + 1 == static_cast<int>(k)) {
                b.distance = hyperplane_distance(bisector_normal(prev.start, prev.end), n2);
            } else {
                b.chord = true;
                b.distance = hyperplane_distance(bisector_normal(prev.start, seg.start), n2);
            }
            out.push_back(b);
        }
        prev_long = static_cast<int>(k);
    }
    return out;
}

std::vector<double> bisector_separations(const PiecewisePath& path) {
    std::vector<double> out;
    for (const auto& b : bisector_separation_details(path)) out.push_back(b.distance);
    return out;
}

// ------------------------------------------------------------ endpoints

BoundaryPoint fixed_point(const Mat& g, int direction) {
    Mat h = direction >= 0 ? g : lorentz_inverse(g);
    const Eigen::Index size = h.rows();
    Vec v = basis_vector(static_cast<int>(size), 0);
    Vec dir = Vec::Zero(size - 1);
    // Iterate to the working precision rather than stopping at 1e-10:
    // separations far below double resolution are meaningful here.
    const Real target = pow(Real(2), -static_cast<int>(precision_bits() * 9 / 10));
    Real change = 1;
    bool coarse = false;
    for (int iter = 0; iter < 10000; ++iter) {
        Vec w = h * v;
        if (w(0) <= 0) throw Error(ErrorCode::NoConvergence, "iteration left the future cone");
        w /= w(0);
        Vec d = w.tail(size - 1);
        Real dn = d.norm();
        if (dn == 0) {
            v = w;
            continue;
        }
        Vec nd = d / dn;
        change = (nd - dir).norm();
        dir = nd;
        v = w;
        if (change < Real(1e-10)) coarse = true;
        if (change <= target) break;
    }
    // A converged direction must also sit on the null cone; elliptic maps
    // fix an interior point instead.
    Real nullness = abs(mink_inner(v, v));
    if (!coarse || nullness > Real(1e-8)) throw Error(ErrorCode::NoConvergence, "isometry has no attracting fixed point");
    return BoundaryPoint(dir);
}

BoundaryPoint endpoint_at_infinity(const Word& w, const Configuration& c, int direction) {
    if (w.empty()) throw Error(ErrorCode::EmptyWord, "the empty word acts trivially");
    PrecisionGuard guard(bits_for_distance(c.word_length_bound(w) + 20.0));
    return fixed_point(c.word_isometry(w), direction);
}

// ------------------------------------------------------------- pipeline

PipelineResult run_pipeline(const Configuration& c, const Word& w, int periods, int pair_samples,
                            std::uint64_t seed, int threads) {
    PipelineResult r;
    r.word = free_reduce(w);
    r.itinerary = word_to_itinerary(r.word, c.n());
    r.raw = build_raw_path(c, r.itinerary, periods);
    PrecisionGuard guard(r.raw.precision_bits);
    r.replaced = replace_segments(c, r.raw);
    r.final_path = repartition(r.replaced);
    r.certificate = certify_quasigeodesic(r.final_path, pair_samples, seed, threads);
    r.bisectors = bisector_separation_details(r.final_path);
    r.min_bisector = std::numeric_limits<double>::infinity();
    for (const auto& b : r.bisectors) r.min_bisector = std::min(r.min_bisector, b.distance);
    r.min_perpendicular = std::numeric_limits<double>::infinity();
    for (const auto& len : r.final_path.perpendicular_lengths)
        r.min_perpendicular = std::min(r.min_perpendicular, to_double(len));
    Real pi = boost::math::constants::pi<Real>();
    for (const auto& j : r.final_path.junctions) {
        Real e = std::min(abs(j.angle - pi / 2), abs(j.angle - pi));
        r.worst_angle_error = std::max(r.worst_angle_error, to_double(e));
    }
    r.endpoints_preserved = same_point(r.raw.first_point(), r.final_path.first_point()) &&
                            same_point(r.raw.last_point(), r.final_path.last_point());
    for (const auto& s : r.final_path.segments) {
        if (s.kind == SegmentKind::Short) {
            ++r.short_segments;
            r.max_short_length = std::max(r.max_short_length, to_double(s.length));
        } else {
            ++r.long_segments;
        }
    }
    return r;
}

}  // namespace kleinian
