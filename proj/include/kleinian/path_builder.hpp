#pragma once
// Piecewise geodesic lifts of loops, their right-angled surgery, the
// [3L, 6L) repartition and the (18L, 4+12L) quasi-geodesic certificate.

#include "kleinian/configuration.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace kleinian {

enum class SegmentKind { Raw, Long, Short };

// Where a segment came from during surgery.
enum class SegmentRole {
    Raw,            // untouched raw segment
    AlongStart,     // O_i -> a, on the start junction geodesic
    Perpendicular,  // a -> b, common perpendicular or foot segment
    AlongEnd,       // b -> O_{i+1}, on the end junction geodesic
};

enum class SurgeryCase { Keep, Case1, Case2, Case2Degenerate, MirrorCase1 };

struct PathSegment {
    PathSegment(HPoint s, HPoint e, Real len) : start(std::move(s)), end(std::move(e)), length(std::move(len)) {}

    HPoint start;
    HPoint end;
    Real length;
    SegmentKind kind = SegmentKind::Raw;
    SegmentRole role = SegmentRole::Raw;
    int syllable = 0;                        // index of the raw segment it came from
    bool end_is_lift = false;                // end point is one of the lifts O_i
    std::optional<GeodesicSubspace> plane;   // carrier plane of raw segments
};

struct Junction {
    HPoint point;
    Real angle;          // interior angle, pi for straight continuation
    bool lift = false;   // true at the preserved lifts O_i
};

struct SyllableFrame {
    Plane plane;
    Word subword;
    Mat before;  // accumulated isometry G_{i-1}
    Mat step;    // syllable isometry g_i (configuration coordinates)
};

struct PiecewisePath {
    int m = 0;
    unsigned precision_bits = 0;
    std::vector<PathSegment> segments;
    std::vector<Junction> junctions;      // junctions[k] joins segments k and k+1
    std::vector<SyllableFrame> syllables;  // raw metadata, one per raw segment
    std::vector<HPoint> lifts;             // O_0 .. O_K
    std::vector<SurgeryCase> cases;        // per raw segment after replacement
    std::vector<Real> perpendicular_lengths;  // Case 2 common perpendiculars

    Real total_length() const;
    const HPoint& first_point() const { return segments.front().start; }
    const HPoint& last_point() const { return segments.back().end; }
};

struct PointIntersection {
    HPoint point;
};
struct GeodesicIntersection {
    Geodesic geodesic;
};
using JunctionType = std::variant<PointIntersection, GeodesicIntersection>;

// Periods of the itinerary are concatenated; adjacent syllables that end
// up in the same plane across the seam are merged.
PiecewisePath build_raw_path(const Configuration& c, const Itinerary& it, int periods);
// i indexes the junction between raw segments i-1 and i (1 <= i < K).
JunctionType classify_junction(const Configuration& c, const PiecewisePath& raw, int i);
PiecewisePath replace_segments(const Configuration& c, const PiecewisePath& raw);
PiecewisePath repartition(const PiecewisePath& path);

// Recomputes junction points and angles from the segment list.
void recompute_junctions(PiecewisePath& path);

struct QuasiGeodesicCertificate {
    double A = 0;
    double B = 0;
    double L = 0;
    double worst_margin = 0;
    double worst_s_a = 0;  // arclength parameters of the worst pair
    double worst_s_b = 0;
    double worst_upper_slack = 0;  // min of A*len + B - d
    long samples = 0;
    std::uint64_t seed = 0;
    double endpoints_distance = 0;
    double total_length = 0;
    bool passes() const { return worst_margin >= 0 && worst_upper_slack >= 0; }
};

QuasiGeodesicCertificate certify_quasigeodesic(const PiecewisePath& path, int pair_samples, std::uint64_t seed,
                                               int threads = 0);

struct BisectorSeparation {
    int first = 0;    // index of the earlier long segment
    int second = 0;   // index of the later long segment
    bool chord = false;  // true when measured against the chord first.start -> second.start
    double distance = 0;
};
std::vector<BisectorSeparation> bisector_separation_details(const PiecewisePath& path);
std::vector<double> bisector_separations(const PiecewisePath& path);

// Attracting (+1) or repelling (-1) fixed point of the letter product.
BoundaryPoint endpoint_at_infinity(const Word& w, const Configuration& c, int direction);
BoundaryPoint fixed_point(const Mat& g, int direction);

// Point of the path at arclength s.
HPoint point_at(const PiecewisePath& path, const Real& s);

// Angle classification used by the surgery invariants.
bool is_right_or_straight(const Real& angle, double tol = 1e-6);

struct PipelineResult {
    Word word;
    Itinerary itinerary;
    PiecewisePath raw;
    PiecewisePath replaced;
    PiecewisePath final_path;
    QuasiGeodesicCertificate certificate;
    std::vector<BisectorSeparation> bisectors;
    double min_bisector = 0;           // +inf when there are no admissible pairs
    double min_perpendicular = 0;      // +inf when no Case 2 occurred
    double worst_angle_error = 0;      // max distance of a junction angle to {pi/2, pi}
    bool endpoints_preserved = false;  // exact equality of raw and final endpoints
    double max_short_length = 0;
    int short_segments = 0;
    int long_segments = 0;
};

// word -> itinerary -> raw -> replace -> repartition -> certify.
PipelineResult run_pipeline(const Configuration& c, const Word& w, int periods, int pair_samples,
                            std::uint64_t seed, int threads = 0);

// Precision that keeps relative geometry along the periodized word exact.
unsigned path_precision_bits(const Configuration& c, const Word& w, int periods);

}  // namespace kleinian
