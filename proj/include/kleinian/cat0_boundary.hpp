#pragma once

#include "kleinian/configuration.hpp"
#include "kleinian/words.hpp"

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kleinian {

// Letters of the 4-valent tree: a, A = a^-1, b, B = b^-1.
enum TreeLetter : int { kA = 0, kAinv = 1, kB = 2, kBinv = 3 };
inline int tree_inverse(int l) { return l ^ 1; }

// Eventually periodic reduced infinite word, kept in canonical form
// (primitive block, shortest prefix).
class TreeRay {
public:
    TreeRay(std::vector<int> prefix, std::vector<int> block);

    const std::vector<int>& prefix() const { return prefix_; }
    const std::vector<int>& block() const { return block_; }
    int letter(long i) const;  // 0-based
    // Letters up to and including index `count - 1`.
    std::vector<int> letters(long count) const;

    bool operator==(const TreeRay&) const = default;

private:
    std::vector<int> prefix_;
    std::vector<int> block_;
};

inline constexpr long kInfinitePrefix = std::numeric_limits<long>::max();

// Length of the longest common prefix (kInfinitePrefix for equal rays).
long common_prefix(const TreeRay& r1, const TreeRay& r2);
// Distance between the points at tree distance s1 along r1 and s2 along r2.
double tree_distance(const TreeRay& r1, double s1, const TreeRay& r2, double s2);
// Ray obtained by acting with a generator letter (prepending and reducing).
TreeRay act(int letter, const TreeRay& r);

struct ProductRay {
    std::vector<double> speeds;              // unit l2 norm
    std::vector<std::optional<TreeRay>> rays;  // present exactly where speed > 0

    int n() const { return static_cast<int>(speeds.size()); }
    void validate() const;
    bool operator==(const ProductRay&) const = default;
};

// Point of a product ray: distance travelled in each factor.
struct ProductPoint {
    const ProductRay* ray = nullptr;
    std::vector<double> s;
};
ProductPoint product_point(const ProductRay& r, double t);
double product_distance(const ProductPoint& p, const ProductPoint& q);

struct VisualNeighborhood {
    ProductRay center;
    double epsilon = 0;
    double R = 0;
};
bool in_neighborhood(const ProductRay& r, const VisualNeighborhood& nb);

// Letters of all factors with completion time <= horizon / min speed,
// merged by completion time (ties to the lower factor).
Word ray_word(const ProductRay& r, int horizon);
Itinerary ray_to_itinerary(const ProductRay& r, int horizon);
BoundaryPoint boundary_map_i(const ProductRay& r, const Configuration& c, int horizon);

ProductRay parse_ray(const std::string& text);
std::string format_ray(const ProductRay& r);
std::vector<ProductRay> read_rays(std::istream& is);
std::vector<ProductRay> random_rays(int n, int count, std::uint64_t seed);

struct InjectivityReport {
    int horizon = 0;
    double tol = 0;
    long pairs = 0;
    Real min_separation;  // may lie far below the double range
    int min_i = -1, min_j = -1;
    long below_tol = 0;
    bool distinct = false;  // every separation > 0
    bool passed = false;    // every separation >= tol
    // Per ray: gaps[k] is the chordal distance between the images at
    // horizons gap_from + k and gap_from + k + 1. Gaps below 2^(-3/4 of the
    // working precision) are rounding noise and are stored as 0.
    int gap_from = 0;
    int gap_to = 0;
    std::vector<std::vector<Real>> gaps;
    bool gaps_decreasing = false;     // gap(h+2) < gap(h) throughout (exact zeros allowed to persist)
    long consecutive_violations = 0;  // count of gap(h+1) >= gap(h) with gap(h) > 0
};

// Throws Precondition if two rays coincide.
InjectivityReport injectivity_test(const std::vector<ProductRay>& rays, const Configuration& c, int horizon,
                                   double tol, int gap_from = 6, int gap_to = -1, int threads = 0);

}  // namespace kleinian
