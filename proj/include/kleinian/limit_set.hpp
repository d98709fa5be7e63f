#pragma once

#include "kleinian/configuration.hpp"
#include "kleinian/hyperboloid.hpp"
#include "kleinian/words.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace kleinian {

enum class Component { S, E };

struct LimitPoint {
    BoundaryPoint point;
    int word_length = 0;
    Component component = Component::S;
    std::string source;  // plane bit-string for S points, itinerary tag for E points
};

struct LimitSetSample {
    int m = 0;  // dimension of the ambient hyperbolic space; points live on S^{m-1}
    std::vector<LimitPoint> points;
};

// Group elements whose normal form has length <= depth, as normal-form words
// in shortlex order (identity first).
std::vector<Word> enumerate_words(const Configuration& c, int depth, long cap = 1000000);
// Number of elements enumerate_words would return, without building them.
long count_words(int n, int depth);

// Quasi-uniform points of the boundary sphere of plane b. For n = 2 the
// points are equally spaced on the circle starting at the first member axis;
// for n >= 3 the 2n member axis endpoints come first.
std::vector<BoundaryPoint> sample_sphere(const Configuration& c, const Plane& b, int count,
                                         std::uint64_t seed = 0);

// An eventually periodic itinerary: prefix followed by period repeated.
struct ItineraryStream {
    Itinerary prefix;
    Itinerary period;

    Itinerary truncate(int horizon) const;
    std::string tag() const;
};

// Endpoint estimate of the ray following the stream, from its first
// `horizon` syllables.
BoundaryPoint e_point(const Configuration& c, const ItineraryStream& stream, int horizon);
// Chordal gaps between estimates at consecutive horizons h and h+1 for
// h = from..to-1.
std::vector<double> e_point_gaps(const Configuration& c, const ItineraryStream& stream, int from, int to);
// Deterministic family of streams alternating between pairs of planes.
std::vector<ItineraryStream> default_e_streams(const Configuration& c, int count);

struct OrbitOptions {
    int e_points = 0;      // number of E points appended
    int e_horizon = 6;     // syllables per E point
    std::uint64_t seed = 0;
    int threads = 0;
};

// Images of the base-sphere samples under every enumerated element, one row
// per (element, sample point), in (element, plane, point) order.
LimitSetSample orbit_sample(const Configuration& c, int depth, int per_sphere, const OrbitOptions& opt = {});

// Removes points within `tol` chordal distance of an earlier point.
LimitSetSample dedup(const LimitSetSample& s, double tol = 1e-7);
// max over points of `next` of the distance to the nearest point of `prev`.
double one_sided_hausdorff(const LimitSetSample& next, const LimitSetSample& prev, int threads = 0);
// True if every point of `inner` is within tol of some point of `outer`.
bool contained_in(const LimitSetSample& inner, const LimitSetSample& outer, double tol = 1e-7);

// Stereographic projection S^3 -> R^3 from a unit pole.
using Point3 = std::array<double, 3>;
class Stereographic {
public:
    explicit Stereographic(std::array<double, 4> pole = {1, 0, 0, 0});
    Point3 project(const std::array<double, 4>& x) const;
    std::array<double, 4> unproject(const Point3& y) const;
    const std::array<double, 4>& pole() const { return pole_; }

private:
    std::array<double, 4> pole_;
    std::array<std::array<double, 4>, 3> frame_;  // orthonormal basis of the pole's complement
};
std::vector<Point3> stereographic_3d(const std::vector<BoundaryPoint>& points,
                                     const std::array<double, 4>& pole = {1, 0, 0, 0});

void write_csv(std::ostream& os, const LimitSetSample& s);
void write_ply(std::ostream& os, const LimitSetSample& s, const std::array<double, 4>& pole = {1, 0, 0, 0});
// Reads back the CSV format (for tests and comparisons).
LimitSetSample read_csv(std::istream& is);

}  // namespace kleinian
