#include "kleinian/limit_set.hpp"

#include "kleinian/errors.hpp"
#include "kleinian/parallel.hpp"
#include "kleinian/path_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace kleinian {

// ---------------------------------------------------------- enumeration

namespace {

// Reduced words of one factor with length exactly k, in letter order.
std::vector<std::vector<Word>> factor_words(int factor, int depth) {
    std::vector<std::vector<Word>> by_len(static_cast<size_t>(depth) + 1);
    by_len[0].push_back({});
    for (int k = 1; k <= depth; ++k) {
        for (const Word& w : by_len[static_cast<size_t>(k - 1)]) {
            for (int gen = 0; gen < 2; ++gen)
                for (int exp : {-1, 1}) {
                    Letter l{factor, gen, exp};
                    if (!w.empty() && w.back() == l.inverse()) continue;
                    Word x = w;
                    x.push_back(l);
                    by_len[static_cast<size_t>(k)].push_back(std::move(x));
                }
        }
    }
    return by_len;
}

bool shortlex_less(const Word& a, const Word& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
}

}  // namespace

long count_words(int n, int depth) {
    if (n < 1 || depth < 0) throw Error(ErrorCode::InvalidParameters, "count_words needs n >= 1, depth >= 0");
    const long saturate = std::numeric_limits<long>::max() / 4;
    std::vector<long> single(static_cast<size_t>(depth) + 1, 0);
    single[0] = 1;
    long p = 4;
    for (int k = 1; k <= depth; ++k) {
        single[static_cast<size_t>(k)] = p;
        p = std::min(saturate, p * 3);
    }
    std::vector<long> total = single;
    for (int f = 2; f <= n; ++f) {
        std::vector<long> next(total.size(), 0);
        for (size_t i = 0; i < total.size(); ++i)
            for (size_t j = 0; i + j < total.size(); ++j) {
                long prod = (total[i] != 0 && single[j] > saturate / total[i]) ? saturate : total[i] * single[j];
                next[i + j] = std::min(saturate, next[i + j] + prod);
            }
        total = std::move(next);
    }
    long sum = 0;
    for (long t : total) sum = std::min(saturate, sum + t);
    return sum;
}

std::vector<Word> enumerate_words(const Configuration& c, int depth, long cap) {
    if (depth < 0) throw Error(ErrorCode::InvalidParameters, "depth must be >= 0");
    long count = count_words(c.n(), depth);
    if (count > cap)
        throw Error(ErrorCode::DepthTooLarge, "depth " + std::to_string(depth) + " gives " + std::to_string(count) +
                                                  " words, above the cap " + std::to_string(cap));
    std::vector<std::vector<std::vector<Word>>> per_factor;
    for (int f = 1; f <= c.n(); ++f) per_factor.push_back(factor_words(f, depth));

    std::vector<Word> out;
    out.reserve(static_cast<size_t>(count));
    // Depth-first over factor lengths; the normal form concatenates factors in order.
    std::function<void(int, int, Word&)> rec = [&](int f, int budget, Word& acc) {
        if (f == c.n()) {
            out.push_back(acc);
            return;
        }
        for (int k = 0; k <= budget; ++k)
            for (const Word& w : per_factor[static_cast<size_t>(f)][static_cast<size_t>(k)]) {
                size_t mark = acc.size();
                acc.insert(acc.end(), w.begin(), w.end());
                rec(f + 1, budget - k, acc);
                acc.resize(mark);
            }
    };
    Word acc;
    rec(0, depth, acc);
    std::sort(out.begin(), out.end(), shortlex_less);
    return out;
}

// ------------------------------------------------------------- spheres

std::vector<BoundaryPoint> sample_sphere(const Configuration& c, const Plane& b, int count, std::uint64_t seed) {
    if (count < 1) throw Error(ErrorCode::InvalidParameters, "count must be >= 1");
    GeodesicSubspace s = c.plane(b);
    const int n = c.n();
    const Mat& basis = s.basis();
    auto embed = [&](const std::vector<double>& u) {
        MinkowskiVector v = basis.col(0);
        for (int k = 0; k < n; ++k) v += Real(u[static_cast<size_t>(k)]) * basis.col(k + 1);
        return BoundaryPoint::from_null(v);
    };
    std::vector<BoundaryPoint> out;
    if (n == 1) {
        for (int i = 0; i < count; ++i) out.push_back(embed({i % 2 == 0 ? 1.0 : -1.0}));
        return out;
    }
    if (n == 2) {
        const double two_pi = 2 * std::acos(-1.0);
        for (int i = 0; i < count; ++i) {
            double t = two_pi * i / count;
            out.push_back(embed({std::cos(t), std::sin(t)}));
        }
        return out;
    }
    for (int i = 0; i < count && i < 2 * n; ++i) {
        std::vector<double> u(static_cast<size_t>(n), 0.0);
        u[static_cast<size_t>(i / 2)] = i % 2 == 0 ? 1.0 : -1.0;
        out.push_back(embed(u));
    }
    std::uint64_t mix = seed;
    for (char ch : b) mix = mix * 1099511628211ULL + static_cast<unsigned char>(ch);
    std::mt19937_64 rng(mix);
    std::normal_distribution<double> normal;
    while (static_cast<int>(out.size()) < count) {
        std::vector<double> u(static_cast<size_t>(n));
        double norm = 0;
        for (double& x : u) {
            x = normal(rng);
            norm += x * x;
        }
        norm = std::sqrt(norm);
        if (norm < 1e-12) continue;
        for (double& x : u) x /= norm;
        out.push_back(embed(u));
    }
    return out;
}

// ------------------------------------------------------------- E points

Itinerary ItineraryStream::truncate(int horizon) const {
    Itinerary out;
    for (int i = 0; i < horizon; ++i) {
        size_t k = static_cast<size_t>(i);
        out.push_back(k < prefix.size() ? prefix[k] : period[(k - prefix.size()) % period.size()]);
    }
    return out;
}

std::string ItineraryStream::tag() const {
    std::string s;
    if (!prefix.empty()) s += format_itinerary(prefix) + " ";
    return s + "(" + format_itinerary(period) + ")^*";
}

namespace {

void check_stream(const ItineraryStream& st) {
    if (st.period.empty()) throw Error(ErrorCode::StreamEventuallyConstant, "stream has an empty period");
    bool varies = false;
    for (const auto& s : st.period) varies = varies || s.plane != st.period.front().plane;
    if (!varies)
        throw Error(ErrorCode::StreamEventuallyConstant,
                    "stream is eventually constant in plane " + st.period.front().plane);
}

}  // namespace

BoundaryPoint e_point(const Configuration& c, const ItineraryStream& stream, int horizon) {
    check_stream(stream);
    if (horizon < 1) throw Error(ErrorCode::InvalidParameters, "horizon must be >= 1");
    return endpoint_at_infinity(concatenate(stream.truncate(horizon)), c, +1);
}

std::vector<double> e_point_gaps(const Configuration& c, const ItineraryStream& stream, int from, int to) {
    std::vector<double> gaps;
    if (to <= from) return gaps;
    Word longest = concatenate(stream.truncate(to));
    PrecisionGuard guard(bits_for_distance(c.word_length_bound(longest) + 20.0));
    BoundaryPoint prev = e_point(c, stream, from);
    for (int h = from + 1; h <= to; ++h) {
        BoundaryPoint next = e_point(c, stream, h);
        gaps.push_back(to_double(chordal(prev, next)));
        prev = next;
    }
    return gaps;
}

std::vector<ItineraryStream> default_e_streams(const Configuration& c, int count) {
    std::vector<Plane> planes = c.planes();
    const int n = c.n();
    const size_t np = planes.size();
    std::vector<std::pair<size_t, size_t>> pairs;
    for (size_t i = 0; i < np; ++i)
        for (size_t j = 0; j < np; ++j)
            if (i != j) pairs.emplace_back(i, j);
    // Later rounds repeat each letter more often so every stream is distinct.
    auto syllable = [&](const Plane& b, int rotation, int reps) {
        Syllable s{b, {}};
        for (int k = 0; k < n; ++k) {
            int f = 1 + (k + rotation) % n;
            for (int r = 0; r < reps; ++r) s.subword.push_back(Letter{f, b[static_cast<size_t>(f - 1)] - '0', +1});
        }
        return s;
    };
    std::vector<ItineraryStream> out;
    for (int k = 0; k < count; ++k) {
        const size_t round = static_cast<size_t>(k) / pairs.size();
        const auto& [i, j] = pairs[static_cast<size_t>(k) % pairs.size()];
        int rotation = static_cast<int>(round % static_cast<size_t>(n));
        int reps = 1 + static_cast<int>(round / static_cast<size_t>(n));
        out.push_back(ItineraryStream{{}, {syllable(planes[i], rotation, reps), syllable(planes[j], rotation, reps)}});
    }
    return out;
}

// --------------------------------------------------------------- orbits

LimitSetSample orbit_sample(const Configuration& c, int depth, int per_sphere, const OrbitOptions& opt) {
    if (per_sphere < 1) throw Error(ErrorCode::InvalidParameters, "per_sphere must be >= 1");
    std::vector<Word> words = enumerate_words(c, depth);
    PrecisionGuard guard(bits_for_distance(depth * c.max_letter_length() + 20.0));

    std::vector<Plane> planes = c.planes();
    std::vector<std::vector<BoundaryPoint>> base;
    for (const Plane& b : planes) base.push_back(sample_sphere(c, b, per_sphere, opt.seed));
    const size_t block = planes.size() * static_cast<size_t>(per_sphere);

    LimitSetSample out;
    out.m = c.ambient_dim();
    std::vector<std::optional<LimitPoint>> rows(words.size() * block);
    parallel_for(words.size(), opt.threads, [&](size_t wi) {
        Mat g = c.word_isometry(words[wi]);
        for (size_t p = 0; p < planes.size(); ++p)
            for (size_t k = 0; k < static_cast<size_t>(per_sphere); ++k)
                rows[wi * block + p * static_cast<size_t>(per_sphere) + k] =
                    LimitPoint{apply(g, base[p][k]), static_cast<int>(words[wi].size()), Component::S, planes[p]};
    });
    out.points.reserve(rows.size() + static_cast<size_t>(std::max(0, opt.e_points)));
    for (auto& r : rows) out.points.push_back(std::move(*r));

    for (const ItineraryStream& st : default_e_streams(c, opt.e_points)) {
        Word w = concatenate(st.truncate(opt.e_horizon));
        out.points.push_back(LimitPoint{e_point(c, st, opt.e_horizon), static_cast<int>(w.size()), Component::E,
                                        st.tag()});
    }
    return out;
}

// ------------------------------------------------------ point matching

namespace {

struct CellHash {
    size_t operator()(const std::vector<long long>& k) const {
        size_t h = 1469598103934665603ULL;
        for (long long x : k) h = (h ^ static_cast<size_t>(x)) * 1099511628211ULL;
        return h;
    }
};

// Uniform grid over the sphere with cell size tol; neighbours are found by
// scanning the 3^m surrounding cells.
class PointGrid {
public:
    PointGrid(int m, double tol) : m_(m), tol_(tol) {}

    void insert(const std::vector<double>& x, size_t id) { cells_[key(x)].push_back({x, id}); }

    bool any_within(const std::vector<double>& x) const {
        std::vector<long long> base = key(x);
        std::vector<long long> k(base.size());
        long total = 1;
        for (int i = 0; i < m_; ++i) total *= 3;
        for (long code = 0; code < total; ++code) {
            long c = code;
            for (int i = 0; i < m_; ++i) {
                k[static_cast<size_t>(i)] = base[static_cast<size_t>(i)] + (c % 3) - 1;
                c /= 3;
            }
            auto it = cells_.find(k);
            if (it == cells_.end()) continue;
            for (const auto& e : it->second) {
                double d2 = 0;
                for (int i = 0; i < m_; ++i) {
                    double d = e.first[static_cast<size_t>(i)] - x[static_cast<size_t>(i)];
                    d2 += d * d;
                }
                if (d2 <= tol_ * tol_) return true;
            }
        }
        return false;
    }

private:
    std::vector<long long> key(const std::vector<double>& x) const {
        std::vector<long long> k(x.size());
        for (size_t i = 0; i < x.size(); ++i) k[i] = static_cast<long long>(std::floor(x[i] / tol_));
        return k;
    }

    int m_;
    double tol_;
    std::unordered_map<std::vector<long long>, std::vector<std::pair<std::vector<double>, size_t>>, CellHash> cells_;
};

std::vector<double> as_doubles(const BoundaryPoint& p) {
    std::vector<double> x(static_cast<size_t>(p.dir().size()));
    for (Eigen::Index i = 0; i < p.dir().size(); ++i) x[static_cast<size_t>(i)] = to_double(p.dir()(i));
    return x;
}

}  // namespace

LimitSetSample dedup(const LimitSetSample& s, double tol) {
    LimitSetSample out;
    out.m = s.m;
    PointGrid grid(s.m, tol);
    for (size_t i = 0; i < s.points.size(); ++i) {
        std::vector<double> x = as_doubles(s.points[i].point);
        if (grid.any_within(x)) continue;
        grid.insert(x, i);
        out.points.push_back(s.points[i]);
    }
    return out;
}

bool contained_in(const LimitSetSample& inner, const LimitSetSample& outer, double tol) {
    PointGrid grid(outer.m, tol);
    for (size_t i = 0; i < outer.points.size(); ++i) grid.insert(as_doubles(outer.points[i].point), i);
    for (const auto& p : inner.points)
        if (!grid.any_within(as_doubles(p.point))) return false;
    return true;
}

double one_sided_hausdorff(const LimitSetSample& next, const LimitSetSample& prev, int threads) {
    if (prev.points.empty() || next.points.empty()) throw Error(ErrorCode::InvalidParameters, "empty sample");
    std::vector<std::vector<double>> a, b;
    for (const auto& p : next.points) a.push_back(as_doubles(p.point));
    for (const auto& p : prev.points) b.push_back(as_doubles(p.point));
    std::vector<double> nearest(a.size());
    parallel_for(a.size(), threads, [&](size_t i) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& y : b) {
            double d2 = 0;
            for (size_t k = 0; k < y.size(); ++k) d2 += (a[i][k] - y[k]) * (a[i][k] - y[k]);
            best = std::min(best, d2);
        }
        nearest[i] = std::sqrt(best);
    });
    return *std::max_element(nearest.begin(), nearest.end());
}

// -------------------------------------------------------- stereographic

Stereographic::Stereographic(std::array<double, 4> pole) : pole_(pole) {
    double norm = 0;
    for (double x : pole_) norm += x * x;
    norm = std::sqrt(norm);
    if (std::abs(norm - 1) > 1e-9) throw Error(ErrorCode::InvalidParameters, "projection pole must be a unit vector");
    size_t drop = 0;
    for (size_t i = 1; i < 4; ++i)
        if (std::abs(pole_[i]) > std::abs(pole_[drop])) drop = i;
    std::vector<std::array<double, 4>> basis{pole_};
    size_t filled = 0;
    for (size_t i = 0; i < 4; ++i) {
        if (i == drop) continue;
        std::array<double, 4> v{};
        v[i] = 1;
        for (const auto& q : basis) {
            double d = 0;
            for (size_t k = 0; k < 4; ++k) d += v[k] * q[k];
            for (size_t k = 0; k < 4; ++k) v[k] -= d * q[k];
        }
        double len = 0;
        for (double x : v) len += x * x;
        len = std::sqrt(len);
        for (double& x : v) x /= len;
        basis.push_back(v);
        frame_[filled++] = v;
    }
}

Point3 Stereographic::project(const std::array<double, 4>& x) const {
    double gap = 0, dot = 0;
    for (size_t k = 0; k < 4; ++k) {
        gap += (x[k] - pole_[k]) * (x[k] - pole_[k]);
        dot += x[k] * pole_[k];
    }
    if (std::sqrt(gap) < 1e-9) throw Error(ErrorCode::PoleCollision, "point coincides with the projection pole");
    Point3 y{};
    for (size_t i = 0; i < 3; ++i) {
        double d = 0;
        for (size_t k = 0; k < 4; ++k) d += x[k] * frame_[i][k];
        y[i] = d / (1 - dot);
    }
    return y;
}

std::array<double, 4> Stereographic::unproject(const Point3& y) const {
    double r2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
    std::array<double, 4> x{};
    for (size_t k = 0; k < 4; ++k) {
        double v = (r2 - 1) * pole_[k];
        for (size_t i = 0; i < 3; ++i) v += 2 * y[i] * frame_[i][k];
        x[k] = v / (r2 + 1);
    }
    return x;
}

std::vector<Point3> stereographic_3d(const std::vector<BoundaryPoint>& points, const std::array<double, 4>& pole) {
    Stereographic proj(pole);
    std::vector<Point3> out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (p.ambient_dim() != 4)
            throw Error(ErrorCode::WrongDimension, "stereographic projection needs points on S^3");
        std::vector<double> x = as_doubles(p);
        out.push_back(proj.project({x[0], x[1], x[2], x[3]}));
    }
    return out;
}

// ------------------------------------------------------------------ I/O

namespace {

std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void write_csv(std::ostream& os, const LimitSetSample& s) {
    for (int i = 0; i < s.m; ++i) os << 'x' << i << ',';
    os << "word_len,component,source\n";
    for (const auto& p : s.points) {
        for (double x : as_doubles(p.point)) os << fmt17(x) << ',';
        os << p.word_length << ',' << (p.component == Component::S ? 'S' : 'E') << ',' << p.source << '\n';
    }
}

LimitSetSample read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "empty point-cloud file");
    LimitSetSample s;
    std::stringstream header(line);
    std::string field;
    while (std::getline(header, field, ','))
        if (!field.empty() && field[0] == 'x') ++s.m;
    if (s.m == 0) throw Error(ErrorCode::ParseError, "header has no coordinate columns");
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        while (std::getline(ss, field, ',')) cells.push_back(field);
        if (static_cast<int>(cells.size()) != s.m + 3)
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": wrong column count");
        try {
            Vec dir(s.m);
            for (int i = 0; i < s.m; ++i) dir(i) = Real(std::stod(cells[static_cast<size_t>(i)]));
            LimitPoint p{BoundaryPoint(dir), std::stoi(cells[static_cast<size_t>(s.m)]),
                         cells[static_cast<size_t>(s.m + 1)] == "E" ? Component::E : Component::S,
                         cells[static_cast<size_t>(s.m + 2)]};
            s.points.push_back(std::move(p));
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": bad number");
        }
    }
    return s;
}

void write_ply(std::ostream& os, const LimitSetSample& s, const std::array<double, 4>& pole) {
    if (s.m != 4) throw Error(ErrorCode::WrongDimension, "PLY export needs n = 2 (points on S^3)");
    std::vector<BoundaryPoint> pts;
    for (const auto& p : s.points) pts.push_back(p.point);
    std::vector<Point3> xyz = stereographic_3d(pts, pole);
    os << "ply\nformat ascii 1.0\n";
    os << "comment stereographic projection from pole " << fmt17(pole[0]) << ' ' << fmt17(pole[1]) << ' '
       << fmt17(pole[2]) << ' ' << fmt17(pole[3]) << '\n';
    os << "comment component 0 = sphere orbit point, 1 = E point\n";
    os << "element vertex " << xyz.size() << '\n';
    os << "property double x\nproperty double y\nproperty double z\nproperty uchar component\nend_header\n";
    for (size_t i = 0; i < xyz.size(); ++i)
        os << fmt17(xyz[i][0]) << ' ' << fmt17(xyz[i][1]) << ' ' << fmt17(xyz[i][2]) << ' '
           << (s.points[i].component == Component::S ? 0 : 1) << '\n';
}

}  // namespace kleinian
