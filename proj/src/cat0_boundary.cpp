#include "kleinian/cat0_boundary.hpp"

#include "kleinian/errors.hpp"
#include "kleinian/parallel.hpp"
#include "kleinian/path_builder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <random>
#include <sstream>

namespace kleinian {

// ----------------------------------------------------------------- rays

namespace {

void check_letters(const std::vector<int>& w) {
    for (int l : w)
        if (l < 0 || l > 3) throw Error(ErrorCode::InvalidParameters, "tree letters are 0..3");
}

bool cancels(int x, int y) { return y == tree_inverse(x); }

}  // namespace

TreeRay::TreeRay(std::vector<int> prefix, std::vector<int> block) : prefix_(std::move(prefix)), block_(std::move(block)) {
    if (block_.empty()) throw Error(ErrorCode::InvalidParameters, "ray needs a nonempty repeating block");
    check_letters(prefix_);
    check_letters(block_);
    for (size_t i = 0; i + 1 < prefix_.size(); ++i)
        if (cancels(prefix_[i], prefix_[i + 1])) throw Error(ErrorCode::InvalidParameters, "ray prefix is not reduced");
    for (size_t i = 0; i < block_.size(); ++i)
        if (cancels(block_[i], block_[(i + 1) % block_.size()]))
            throw Error(ErrorCode::InvalidParameters, "ray block repeated with itself is not reduced");
    if (!prefix_.empty() && cancels(prefix_.back(), block_.front()))
        throw Error(ErrorCode::InvalidParameters, "ray prefix cancels against the block");

    // Primitive root of the block.
    const size_t len = block_.size();
    for (size_t d = 1; d < len; ++d) {
        if (len % d != 0) continue;
        bool periodic = true;
        for (size_t i = d; i < len && periodic; ++i) periodic = block_[i] == block_[i - d];
        if (periodic) {
            block_.resize(d);
            break;
        }
    }
    // Shortest prefix: absorb trailing prefix letters into a rotated block.
    while (!prefix_.empty() && prefix_.back() == block_.back()) {
        prefix_.pop_back();
        std::rotate(block_.rbegin(), block_.rbegin() + 1, block_.rend());
    }
}

int TreeRay::letter(long i) const {
    const long p = static_cast<long>(prefix_.size());
    if (i < p) return prefix_[static_cast<size_t>(i)];
    return block_[static_cast<size_t>((i - p) % static_cast<long>(block_.size()))];
}

std::vector<int> TreeRay::letters(long count) const {
    std::vector<int> out;
    for (long i = 0; i < count; ++i) out.push_back(letter(i));
    return out;
}

long common_prefix(const TreeRay& r1, const TreeRay& r2) {
    if (r1 == r2) return kInfinitePrefix;
    const long bound = static_cast<long>(std::max(r1.prefix().size(), r2.prefix().size())) +
                       std::lcm(static_cast<long>(r1.block().size()), static_cast<long>(r2.block().size()));
    for (long i = 0; i < bound; ++i)
        if (r1.letter(i) != r2.letter(i)) return i;
    return kInfinitePrefix;
}

double tree_distance(const TreeRay& r1, double s1, const TreeRay& r2, double s2) {
    long p = common_prefix(r1, r2);
    double shared = p == kInfinitePrefix ? std::min(s1, s2) : std::min({s1, s2, static_cast<double>(p)});
    return s1 + s2 - 2 * shared;
}

TreeRay act(int letter, const TreeRay& r) {
    if (letter < 0 || letter > 3) throw Error(ErrorCode::InvalidParameters, "tree letters are 0..3");
    if (cancels(letter, r.letter(0))) {
        if (!r.prefix().empty()) return TreeRay({r.prefix().begin() + 1, r.prefix().end()}, r.block());
        std::vector<int> block = r.block();
        std::rotate(block.begin(), block.begin() + 1, block.end());
        return TreeRay({}, block);
    }
    std::vector<int> prefix{letter};
    prefix.insert(prefix.end(), r.prefix().begin(), r.prefix().end());
    return TreeRay(prefix, r.block());
}

void ProductRay::validate() const {
    if (speeds.empty() || rays.size() != speeds.size())
        throw Error(ErrorCode::InvalidParameters, "ray needs one speed and one slot per factor");
    double norm = 0;
    bool active = false;
    for (size_t j = 0; j < speeds.size(); ++j) {
        if (!(speeds[j] >= 0)) throw Error(ErrorCode::InvalidParameters, "speeds must be nonnegative");
        norm += speeds[j] * speeds[j];
        active = active || speeds[j] > 0;
        if ((speeds[j] > 0) != rays[j].has_value())
            throw Error(ErrorCode::InvalidParameters,
                        "factor " + std::to_string(j + 1) + " must carry a ray exactly when its speed is positive");
    }
    if (!active) throw Error(ErrorCode::NoActiveFactors, "all speeds are zero");
    if (std::abs(norm - 1) > 1e-9) throw Error(ErrorCode::InvalidParameters, "speeds must have unit l2 norm");
}

ProductPoint product_point(const ProductRay& r, double t) {
    if (t < 0) throw Error(ErrorCode::InvalidParameters, "t must be >= 0");
    ProductPoint p{&r, {}};
    for (double lam : r.speeds) p.s.push_back(lam * t);
    return p;
}

double product_distance(const ProductPoint& p, const ProductPoint& q) {
    if (p.s.size() != q.s.size()) throw Error(ErrorCode::DimensionMismatch, "points of different products");
    double sum = 0;
    for (size_t j = 0; j < p.s.size(); ++j) {
        const auto& r1 = p.ray->rays[j];
        const auto& r2 = q.ray->rays[j];
        double d;
        if (!r1 || !r2) {
            d = (r1 ? p.s[j] : 0.0) + (r2 ? q.s[j] : 0.0);
        } else {
            d = tree_distance(*r1, p.s[j], *r2, q.s[j]);
        }
        sum += d * d;
    }
    return std::sqrt(sum);
}

bool in_neighborhood(const ProductRay& r, const VisualNeighborhood& nb) {
    if (!(nb.epsilon > 0) || !(nb.R > 0)) throw Error(ErrorCode::InvalidParameters, "epsilon and R must be positive");
    return product_distance(product_point(nb.center, nb.R), product_point(r, nb.R)) < nb.epsilon;
}

// ------------------------------------------------------------ itineraries

Word ray_word(const ProductRay& r, int horizon) {
    r.validate();
    if (horizon < 1) throw Error(ErrorCode::InvalidParameters, "horizon must be >= 1");
    double lam_min = 2;
    for (double lam : r.speeds)
        if (lam > 0) lam_min = std::min(lam_min, lam);
    struct Item {
        double time;
        int factor;
        int letter;
    };
    std::vector<Item> items;
    for (int j = 0; j < r.n(); ++j) {
        double lam = r.speeds[static_cast<size_t>(j)];
        if (lam <= 0) continue;
        long count = static_cast<long>(std::floor(horizon * lam / lam_min + 1e-9));
        for (long k = 1; k <= count; ++k)
            items.push_back({static_cast<double>(k) / lam, j + 1, r.rays[static_cast<size_t>(j)]->letter(k - 1)});
    }
    std::stable_sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        if (x.time != y.time) return x.time < y.time;
        return x.factor < y.factor;
    });
    Word w;
    for (const Item& it : items) w.push_back(Letter{it.factor, it.letter / 2, it.letter % 2 == 0 ? 1 : -1});
    return w;
}

Itinerary ray_to_itinerary(const ProductRay& r, int horizon) {
    return word_to_itinerary(ray_word(r, horizon), r.n());
}

BoundaryPoint boundary_map_i(const ProductRay& r, const Configuration& c, int horizon) {
    if (r.n() != c.n()) throw Error(ErrorCode::DimensionMismatch, "ray and configuration have different n");
    return endpoint_at_infinity(ray_word(r, horizon), c, +1);
}

// ---------------------------------------------------------------- literals

namespace {

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return {};
    auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::vector<int> parse_tree_word(const std::string& s, const std::string& context) {
    std::vector<int> out;
    for (size_t i = 0; i < s.size(); ++i) {
        char ch = s[i];
        int l;
        switch (ch) {
            case 'a': l = kA; break;
            case 'A': l = kAinv; break;
            case 'b': l = kB; break;
            case 'B': l = kBinv; break;
            case ' ': continue;
            default: throw Error(ErrorCode::ParseError, context + ": unexpected character '" + std::string(1, ch) + "'");
        }
        if (s.compare(i + 1, 3, "^-1") == 0) {
            l = tree_inverse(l);
            i += 3;
        }
        out.push_back(l);
    }
    return out;
}

std::string format_tree_word(const std::vector<int>& w) {
    static const char* names = "aAbB";
    std::string s;
    for (int l : w) s += names[l];
    return s;
}

std::string format_speed(double x) {
    char buf[40];
    for (int digits = 15; digits <= 17; ++digits) {
        std::snprintf(buf, sizeof buf, "%.*g", digits, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

}  // namespace

ProductRay parse_ray(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';'))
        if (!trim(part).empty()) parts.push_back(trim(part));
    ProductRay r;
    bool have_speeds = false;
    std::vector<std::optional<TreeRay>> factors;
    for (const std::string& p : parts) {
        auto eq = p.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "expected key=value in '" + p + "'");
        std::string key = trim(p.substr(0, eq)), value = trim(p.substr(eq + 1));
        if (key == "speeds") {
            std::stringstream vs(value);
            std::string num;
            while (std::getline(vs, num, ',')) {
                try {
                    size_t used = 0;
                    double x = std::stod(trim(num), &used);
                    if (used != trim(num).size()) throw std::invalid_argument("trailing");
                    r.speeds.push_back(x);
                } catch (const std::logic_error&) {
                    throw Error(ErrorCode::ParseError, "bad speed '" + num + "'");
                }
            }
            have_speeds = true;
        } else if (key.size() >= 2 && key[0] == 'f') {
            int j;
            try {
                j = std::stoi(key.substr(1));
            } catch (const std::logic_error&) {
                throw Error(ErrorCode::ParseError, "bad factor key '" + key + "'");
            }
            if (j < 1 || j > 64) throw Error(ErrorCode::ParseError, "factor index out of range in '" + key + "'");
            auto open = value.find('('), close = value.rfind(")^*");
            if (open == std::string::npos || close == std::string::npos || close < open ||
                close + 3 != value.size())
                throw Error(ErrorCode::ParseError, key + ": expected prefix(block)^*");
            std::vector<int> prefix = parse_tree_word(value.substr(0, open), key);
            std::vector<int> block = parse_tree_word(value.substr(open + 1, close - open - 1), key);
            if (static_cast<int>(factors.size()) < j) factors.resize(static_cast<size_t>(j));
            if (factors[static_cast<size_t>(j - 1)]) throw Error(ErrorCode::ParseError, key + " given twice");
            try {
                factors[static_cast<size_t>(j - 1)] = TreeRay(prefix, block);
            } catch (const Error& e) {
                throw Error(ErrorCode::ParseError, key + ": " + e.what());
            }
        } else {
            throw Error(ErrorCode::ParseError, "unknown key '" + key + "'");
        }
    }
    if (!have_speeds) throw Error(ErrorCode::ParseError, "ray literal needs speeds=");
    if (factors.size() > r.speeds.size()) throw Error(ErrorCode::ParseError, "more factor words than speeds");
    factors.resize(r.speeds.size());
    r.rays = std::move(factors);
    double norm = 0;
    for (double x : r.speeds) norm += x * x;
    norm = std::sqrt(norm);
    if (std::abs(norm - 1) > 1e-6) throw Error(ErrorCode::ParseError, "speeds must have unit l2 norm");
    // Speeds already normalized up to rounding are kept bit-exact so that
    // format_ray and parse_ray round-trip.
    if (std::abs(norm - 1) > 1e-12)
        for (double& x : r.speeds) x /= norm;
    try {
        r.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
    return r;
}

std::string format_ray(const ProductRay& r) {
    std::string s = "speeds=";
    for (size_t j = 0; j < r.speeds.size(); ++j) s += (j ? "," : "") + format_speed(r.speeds[j]);
    for (size_t j = 0; j < r.rays.size(); ++j) {
        if (!r.rays[j]) continue;
        s += "; f" + std::to_string(j + 1) + "=" + format_tree_word(r.rays[j]->prefix()) + "(" +
             format_tree_word(r.rays[j]->block()) + ")^*";
    }
    return s;
}

std::vector<ProductRay> read_rays(std::istream& is) {
    std::vector<ProductRay> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        try {
            out.push_back(parse_ray(t));
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

std::vector<ProductRay> random_rays(int n, int count, std::uint64_t seed) {
    if (n < 1 || count < 0) throw Error(ErrorCode::InvalidParameters, "random_rays needs n >= 1, count >= 0");
    std::mt19937_64 rng(seed);
    auto uniform_int = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto random_reduced = [&](int len, int after) {
        std::vector<int> w;
        int prev = after;
        for (int i = 0; i < len; ++i) {
            int l;
            do l = uniform_int(0, 3);
            while (prev >= 0 && cancels(prev, l));
            w.push_back(l);
            prev = l;
        }
        return w;
    };
    auto random_tree_ray = [&]() {
        while (true) {
            std::vector<int> block = random_reduced(uniform_int(1, 3), -1);
            if (cancels(block.back(), block.front())) continue;
            // Prefix generated backwards from the block so that it cannot cancel.
            std::vector<int> rev = random_reduced(uniform_int(0, 3), tree_inverse(block.front()));
            std::vector<int> prefix;
            for (auto it = rev.rbegin(); it != rev.rend(); ++it) prefix.push_back(tree_inverse(*it));
            return TreeRay(prefix, block);
        }
    };
    std::vector<ProductRay> out;
    while (static_cast<int>(out.size()) < count) {
        ProductRay r;
        r.speeds.assign(static_cast<size_t>(n), 0.0);
        r.rays.assign(static_cast<size_t>(n), std::nullopt);
        if (n == 1 || uniform_int(0, 4) == 0) {
            r.speeds[static_cast<size_t>(uniform_int(0, n - 1))] = 1.0;
        } else {
            std::uniform_real_distribution<double> u(0.2, 1.0);
            double norm = 0;
            for (double& x : r.speeds) {
                x = u(rng);
                norm += x * x;
            }
            norm = std::sqrt(norm);
            for (double& x : r.speeds) x /= norm;
        }
        for (int j = 0; j < n; ++j)
            if (r.speeds[static_cast<size_t>(j)] > 0) r.rays[static_cast<size_t>(j)] = random_tree_ray();
        if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(std::move(r));
    }
    return out;
}

// -------------------------------------------------------------- injectivity

InjectivityReport injectivity_test(const std::vector<ProductRay>& rays, const Configuration& c, int horizon,
                                   double tol, int gap_from, int gap_to, int threads) {
    for (size_t i = 0; i < rays.size(); ++i) {
        rays[i].validate();
        if (rays[i].n() != c.n()) throw Error(ErrorCode::DimensionMismatch, "ray and configuration have different n");
        for (size_t j = 0; j < i; ++j)
            if (rays[i] == rays[j])
                throw Error(ErrorCode::Precondition,
                            "rays " + std::to_string(j) + " and " + std::to_string(i) + " coincide: " + format_ray(rays[i]));
    }
    InjectivityReport rep;
    rep.horizon = horizon;
    rep.tol = tol;
    rep.gap_from = std::min(gap_from, horizon);
    rep.gap_to = std::max(gap_to, horizon);

    double longest = 0;
    for (const auto& r : rays) longest = std::max(longest, c.word_length_bound(ray_word(r, rep.gap_to)));
    PrecisionGuard guard(bits_for_distance(longest + 20.0));

    const int levels = rep.gap_to - rep.gap_from + 1;
    const size_t at_horizon = static_cast<size_t>(horizon - rep.gap_from);
    std::vector<std::vector<std::optional<BoundaryPoint>>> images(rays.size(),
                                                                  std::vector<std::optional<BoundaryPoint>>(
                                                                      static_cast<size_t>(levels)));
    parallel_for(rays.size() * static_cast<size_t>(levels), threads, [&](size_t k) {
        size_t i = k / static_cast<size_t>(levels), h = k % static_cast<size_t>(levels);
        images[i][h] = boundary_map_i(rays[i], c, rep.gap_from + static_cast<int>(h));
    });

    rep.distinct = true;
    rep.min_separation = 2;
    for (size_t i = 0; i < rays.size(); ++i)
        for (size_t j = i + 1; j < rays.size(); ++j) {
            Real d = chordal(*images[i][at_horizon], *images[j][at_horizon]);
            ++rep.pairs;
            if (d == 0) rep.distinct = false;
            if (d < Real(tol)) ++rep.below_tol;
            if (d < rep.min_separation) {
                rep.min_separation = d;
                rep.min_i = static_cast<int>(i);
                rep.min_j = static_cast<int>(j);
            }
        }
    rep.passed = rep.distinct && rep.below_tol == 0;

    // Rays whose truncated words are powers of one loop have a fixed image;
    // their gaps are pure rounding (~2^-bits), while genuine gaps stay above
    // ~2^-(bits/2) under the precision policy. Gaps below the midpoint count as 0.
    const Real noise_floor = pow(Real(2), -static_cast<long>(3 * precision_bits() / 4));
    rep.gaps_decreasing = true;
    for (size_t i = 0; i < rays.size(); ++i) {
        std::vector<Real> g;
        for (size_t h = 0; h + 1 < images[i].size(); ++h) {
            Real d = chordal(*images[i][h], *images[i][h + 1]);
            g.push_back(d < noise_floor ? Real(0) : d);
        }
        // Strict decrease, except that a sequence which has reached exactly 0 stays there.
        for (size_t h = 0; h + 2 < g.size(); ++h)
            if (!(g[h + 2] < g[h] || (g[h] == 0 && g[h + 2] == 0))) rep.gaps_decreasing = false;
        for (size_t h = 0; h + 1 < g.size(); ++h)
            if (g[h] > 0 && !(g[h + 1] < g[h])) ++rep.consecutive_violations;
        rep.gaps.push_back(std::move(g));
    }
    return rep;
}

}  // namespace kleinian
