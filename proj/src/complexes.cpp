#include "kleinian/complexes.hpp"

#include "kleinian/errors.hpp"
#include "kleinian/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace kleinian {

// ------------------------------------------------------------ complexes

SimplicialComplex SimplicialComplex::from_facets(const std::vector<std::vector<Label>>& facets) {
    SimplicialComplex k;
    std::set<Label> labels;
    for (const auto& f : facets) labels.insert(f.begin(), f.end());
    k.vertices_.assign(labels.begin(), labels.end());
    std::set<Simplex> unique;
    for (const auto& f : facets) {
        if (f.empty()) continue;
        Simplex s;
        for (const Label& l : f) s.push_back(k.vertex_index(l));
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        unique.insert(std::move(s));
    }
    for (const Simplex& s : unique) {
        bool covered = false;
        for (const Simplex& t : unique)
            if (t.size() > s.size() && std::includes(t.begin(), t.end(), s.begin(), s.end())) {
                covered = true;
                break;
            }
        if (!covered) k.facets_.push_back(s);
    }
    return k;
}

std::vector<Label> SimplicialComplex::facet_labels(size_t i) const {
    std::vector<Label> out;
    for (int v : facets_.at(i)) out.push_back(vertices_[static_cast<size_t>(v)]);
    return out;
}

int SimplicialComplex::dim() const {
    size_t best = 0;
    for (const auto& f : facets_) best = std::max(best, f.size());
    return static_cast<int>(best) - 1;
}

int SimplicialComplex::vertex_index(const Label& l) const {
    auto it = std::lower_bound(vertices_.begin(), vertices_.end(), l);
    if (it == vertices_.end() || *it != l) return -1;
    return static_cast<int>(it - vertices_.begin());
}

std::vector<Simplex> SimplicialComplex::simplices(int k) const {
    std::set<Simplex> out;
    const size_t size = static_cast<size_t>(k + 1);
    for (const auto& f : facets_) {
        if (k < 0 || f.size() < size) continue;
        std::vector<bool> pick(f.size(), false);
        std::fill(pick.begin(), pick.begin() + static_cast<long>(size), true);
        do {
            Simplex s;
            for (size_t i = 0; i < f.size(); ++i)
                if (pick[i]) s.push_back(f[i]);
            out.insert(std::move(s));
        } while (std::prev_permutation(pick.begin(), pick.end()));
    }
    return {out.begin(), out.end()};
}

long SimplicialComplex::simplex_count() const {
    long total = 0;
    for (int k = 0; k <= dim(); ++k) total += static_cast<long>(simplices(k).size());
    return total;
}

bool SimplicialComplex::is_face(const Simplex& s) const {
    for (const auto& f : facets_)
        if (std::includes(f.begin(), f.end(), s.begin(), s.end())) return true;
    return false;
}

SimplicialComplex discrete_complex(const std::vector<Label>& points) {
    std::vector<std::vector<Label>> facets;
    for (const auto& p : points) facets.push_back({p});
    return SimplicialComplex::from_facets(facets);
}

SimplicialComplex join(const SimplicialComplex& k1, const SimplicialComplex& k2) {
    if (k1.facets().empty()) return k2;
    if (k2.facets().empty()) return k1;
    std::vector<Label> shared;
    std::set_intersection(k1.vertices().begin(), k1.vertices().end(), k2.vertices().begin(), k2.vertices().end(),
                          std::back_inserter(shared));
    const bool relabel = !shared.empty();
    std::vector<std::vector<Label>> facets;
    for (size_t i = 0; i < k1.facets().size(); ++i)
        for (size_t j = 0; j < k2.facets().size(); ++j) {
            std::vector<Label> f;
            for (const Label& l : k1.facet_labels(i)) f.push_back(relabel ? l + ".1" : l);
            for (const Label& l : k2.facet_labels(j)) f.push_back(relabel ? l + ".2" : l);
            facets.push_back(std::move(f));
        }
    return SimplicialComplex::from_facets(facets);
}

SimplicialComplex join_power_k3(int n) {
    if (n < 1) throw Error(ErrorCode::InvalidParameters, "join power needs n >= 1");
    SimplicialComplex k;
    for (int j = 1; j <= n; ++j) {
        std::vector<Label> pts;
        for (int i = 0; i < 3; ++i) pts.push_back("p" + std::to_string(j) + "_" + std::to_string(i));
        k = join(k, discrete_complex(pts));
    }
    return k;
}

bool isomorphic(const SimplicialComplex& a, const SimplicialComplex& b) {
    const size_t nv = a.vertices().size();
    if (nv != b.vertices().size() || a.facets().size() != b.facets().size()) return false;
    if (nv > 10) throw Error(ErrorCode::SizeCap, "isomorphism check is brute force; too many vertices");
    std::vector<Simplex> target = b.facets();
    std::sort(target.begin(), target.end());
    std::vector<int> perm(nv);
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::vector<Simplex> mapped;
        for (const auto& f : a.facets()) {
            Simplex s;
            for (int v : f) s.push_back(perm[static_cast<size_t>(v)]);
            std::sort(s.begin(), s.end());
            mapped.push_back(std::move(s));
        }
        std::sort(mapped.begin(), mapped.end());
        if (mapped == target) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

namespace {

bool skip_line(const std::string& line) {
    auto pos = line.find_first_not_of(" \t\r");
    return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

SimplicialComplex read_facets(std::istream& is) {
    std::vector<std::vector<Label>> facets;
    std::string line;
    while (std::getline(is, line)) {
        if (skip_line(line)) continue;
        std::istringstream ss(line);
        std::vector<Label> f;
        Label l;
        while (ss >> l) f.push_back(l);
        facets.push_back(std::move(f));
    }
    if (facets.empty()) throw Error(ErrorCode::ParseError, "facet file contains no facets");
    return SimplicialComplex::from_facets(facets);
}

void write_facets(std::ostream& os, const SimplicialComplex& k) {
    for (size_t i = 0; i < k.facets().size(); ++i) {
        auto labels = k.facet_labels(i);
        for (size_t j = 0; j < labels.size(); ++j) os << (j ? " " : "") << labels[j];
        os << '\n';
    }
}

// ---------------------------------------------------------------- graphs

int Graph::add_vertex(const Label& l) {
    auto it = index_.find(l);
    if (it != index_.end()) return it->second;
    int id = vertex_count();
    labels_.push_back(l);
    adj_.emplace_back();
    index_.emplace(l, id);
    return id;
}

bool Graph::add_edge(int u, int v) {
    if (u == v) throw Error(ErrorCode::InvalidParameters, "self-loop at " + labels_.at(static_cast<size_t>(u)));
    if (has_edge(u, v)) return false;
    edges_.emplace_back(std::min(u, v), std::max(u, v));
    adj_[static_cast<size_t>(u)].push_back(v);
    adj_[static_cast<size_t>(v)].push_back(u);
    return true;
}

bool Graph::has_edge(int u, int v) const {
    const auto& a = adj_.at(static_cast<size_t>(u));
    return std::find(a.begin(), a.end(), v) != a.end();
}

int Graph::vertex_index(const Label& l) const {
    auto it = index_.find(l);
    return it == index_.end() ? -1 : it->second;
}

Graph complete_graph(int k) {
    Graph g;
    for (int i = 0; i < k; ++i) g.add_vertex("v" + std::to_string(i));
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) g.add_edge(i, j);
    return g;
}

Graph complete_bipartite(int a, int b) {
    Graph g;
    for (int i = 0; i < a; ++i) g.add_vertex("u" + std::to_string(i));
    for (int j = 0; j < b; ++j) g.add_vertex("w" + std::to_string(j));
    for (int i = 0; i < a; ++i)
        for (int j = 0; j < b; ++j) g.add_edge(i, a + j);
    return g;
}

Graph one_skeleton(const SimplicialComplex& k) {
    Graph g;
    for (const Label& l : k.vertices()) g.add_vertex(l);
    for (const Simplex& e : k.simplices(1)) g.add_edge(e[0], e[1]);
    return g;
}

Graph read_edge_list(std::istream& is) {
    Graph g;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (skip_line(line)) continue;
        std::istringstream ss(line);
        std::vector<Label> tok;
        Label l;
        while (ss >> l) tok.push_back(l);
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (tok.size() == 1) {
            g.add_vertex(tok[0]);
        } else if (tok.size() == 2) {
            if (tok[0] == tok[1]) throw Error(ErrorCode::ParseError, where + "self-loop");
            if (!g.add_edge(tok[0], tok[1])) throw Error(ErrorCode::ParseError, where + "repeated edge");
        } else {
            throw Error(ErrorCode::ParseError, where + "expected one or two labels");
        }
    }
    return g;
}

void write_edge_list(std::ostream& os, const Graph& g) {
    std::vector<bool> touched(static_cast<size_t>(g.vertex_count()), false);
    for (const auto& [u, v] : g.edges()) touched[static_cast<size_t>(u)] = touched[static_cast<size_t>(v)] = true;
    for (int v = 0; v < g.vertex_count(); ++v)
        if (!touched[static_cast<size_t>(v)]) os << g.labels()[static_cast<size_t>(v)] << '\n';
    for (const auto& [u, v] : g.edges())
        os << g.labels()[static_cast<size_t>(u)] << ' ' << g.labels()[static_cast<size_t>(v)] << '\n';
}

// ------------------------------------------------ configuration geometry

namespace {

std::string axis_label(int j, int s, int sign) {
    return std::string(1, s == 0 ? 'a' : 'b') + std::to_string(j) + (sign > 0 ? "+" : "-");
}

// Label of an axis endpoint of c matching xi, or empty.
std::string match_axis_endpoint(const Configuration& c, const BoundaryPoint& xi) {
    for (int j = 1; j <= c.n(); ++j)
        for (int s = 0; s < 2; ++s)
            for (int sign : {1, -1})
                if (chordal(boundary_endpoint(c.axis(j, s), sign), xi) < 1e-9) return axis_label(j, s, sign);
    return {};
}

}  // namespace

CircleIncidence circle_incidence(const Configuration& c) {
    if (c.n() != 2) throw Error(ErrorCode::WrongDimension, "the circle configuration needs n = 2");
    PrecisionGuard guard(256);
    CircleIncidence out;
    const std::vector<Plane> planes = c.planes();
    std::vector<std::vector<int>> on_circle(planes.size());

    auto add_point = [&](const BoundaryPoint& xi) {
        for (size_t k = 0; k < out.points.size(); ++k)
            if (chordal(out.points[k], xi) < 1e-9) return static_cast<int>(k);
        std::string label = match_axis_endpoint(c, xi);
        if (label.empty()) label = "p" + std::to_string(out.points.size());
        int id = out.graph.add_vertex(label);
        out.points.push_back(xi);
        return id;
    };

    for (size_t i = 0; i < planes.size(); ++i)
        for (size_t j = i + 1; j < planes.size(); ++j) {
            SubspaceIntersection inter = subspace_intersection(c.plane(planes[i]), c.plane(planes[j]));
            if (!std::holds_alternative<GeodesicSubspace>(inter)) continue;
            const Mat& b = std::get<GeodesicSubspace>(inter).basis();
            if (b.cols() != 2) throw Error(ErrorCode::UnexpectedIntersectionDim, "boundary circles share an arc");
            MinkowskiVector base = b.col(0);
            if (base(0) < 0) base = -base;
            Geodesic g(HPoint::normalized(base), b.col(1));
            for (int sign : {1, -1}) {
                int id = add_point(boundary_endpoint(g, sign));
                for (size_t k : {i, j}) {
                    auto& list = on_circle[k];
                    if (std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
                }
            }
        }

    for (size_t i = 0; i < planes.size(); ++i) {
        const GeodesicSubspace plane = c.plane(planes[i]);
        const Mat& basis = plane.basis();
        std::vector<std::pair<double, int>> by_angle;
        for (int id : on_circle[i]) {
            MinkowskiVector v = out.points[static_cast<size_t>(id)].null_rep();
            double x = to_double(mink_inner(v, basis.col(1)));
            double y = to_double(mink_inner(v, basis.col(2)));
            by_angle.emplace_back(std::atan2(y, x), id);
        }
        std::sort(by_angle.begin(), by_angle.end());
        std::vector<int> order;
        for (const auto& [angle, id] : by_angle) order.push_back(id);
        const size_t k = order.size();
        if (k >= 2)
            for (size_t a = 0; a < (k == 2 ? 1 : k); ++a) out.graph.add_edge(order[a], order[(a + 1) % k]);
        out.circle_order.push_back(std::move(order));
    }
    return out;
}

SimplicialComplex incidence_complex(const Configuration& c) {
    PrecisionGuard guard(256);
    const int n = c.n();
    std::vector<std::vector<Label>> facets;
    for (const Plane& b : c.planes()) {
        GeodesicSubspace s = c.plane(b);
        for (int mask = 0; mask < (1 << n); ++mask) {
            std::vector<Label> f;
            for (int j = 1; j <= n; ++j) {
                int gen = b[static_cast<size_t>(j - 1)] - '0';
                int sign = (mask >> (j - 1)) & 1 ? -1 : 1;
                BoundaryPoint xi = boundary_endpoint(c.axis(j, gen), sign);
                if (s.containment_residual(xi.null_rep()) > Real(kGeometricTol))
                    throw Error(ErrorCode::Precondition, "axis endpoint off its boundary sphere");
                f.push_back(axis_label(j, gen, sign));
            }
            facets.push_back(std::move(f));
        }
    }
    return SimplicialComplex::from_facets(facets);
}

// ------------------------------------------------------- join containment

namespace {

using Mask = std::uint64_t;

struct FaceOracle {
    std::vector<Mask> facets;
    bool face(Mask m) const {
        for (Mask f : facets)
            if ((m & ~f) == 0) return true;
        return false;
    }
};

FaceOracle make_oracle(const SimplicialComplex& k) {
    if (k.vertices().size() > 64) throw Error(ErrorCode::SizeCap, "join search supports at most 64 vertices");
    FaceOracle o;
    for (const auto& f : k.facets()) {
        Mask m = 0;
        for (int v : f) m |= Mask{1} << v;
        o.facets.push_back(m);
    }
    return o;
}

// Extends the partial witness; `transversals` holds the vertex masks of all
// transversals of the triples chosen so far.
bool extend(const FaceOracle& o, const std::vector<std::array<int, 3>>& triples, size_t first, int remaining,
            Mask used, const std::vector<Mask>& transversals, std::vector<std::array<int, 3>>& chosen) {
    if (remaining == 0) return true;
    for (size_t t = first; t < triples.size(); ++t) {
        const auto& tr = triples[t];
        Mask bits = (Mask{1} << tr[0]) | (Mask{1} << tr[1]) | (Mask{1} << tr[2]);
        if (used & bits) continue;
        std::vector<Mask> next;
        next.reserve(transversals.size() * 3);
        bool ok = true;
        for (Mask m : transversals) {
            for (int v : tr) {
                Mask x = m | (Mask{1} << v);
                if (!o.face(x)) {
                    ok = false;
                    break;
                }
                next.push_back(x);
            }
            if (!ok) break;
        }
        if (!ok) continue;
        chosen.push_back(tr);
        if (extend(o, triples, t + 1, remaining - 1, used | bits, next, chosen)) return true;
        chosen.pop_back();
    }
    return false;
}

}  // namespace

std::optional<JoinWitness> contains_join_power(const SimplicialComplex& k, int n, int threads) {
    if (n < 1) throw Error(ErrorCode::InvalidParameters, "join power needs n >= 1");
    FaceOracle o = make_oracle(k);
    const int nv = static_cast<int>(k.vertices().size());
    std::vector<std::array<int, 3>> triples;
    for (int a = 0; a < nv; ++a)
        for (int b = a + 1; b < nv; ++b)
            for (int c = b + 1; c < nv; ++c) triples.push_back({a, b, c});
    // Triples are chosen in increasing order, which removes the n! orderings.
    std::vector<std::optional<JoinWitness>> found(triples.size());
    parallel_for(triples.size(), threads, [&](size_t root) {
        const auto& tr = triples[root];
        std::vector<Mask> start;
        for (int v : tr) {
            Mask m = Mask{1} << v;
            if (!o.face(m)) return;
            start.push_back(m);
        }
        std::vector<std::array<int, 3>> chosen{tr};
        Mask used = (Mask{1} << tr[0]) | (Mask{1} << tr[1]) | (Mask{1} << tr[2]);
        if (extend(o, triples, root + 1, n - 1, used, start, chosen)) found[root] = JoinWitness{chosen};
    });
    for (auto& f : found)
        if (f) return f;
    return std::nullopt;
}

bool verify_join_witness(const SimplicialComplex& k, const JoinWitness& w) {
    std::set<int> seen;
    for (const auto& tr : w.triples)
        for (int v : tr) {
            if (v < 0 || v >= static_cast<int>(k.vertices().size()) || !seen.insert(v).second) return false;
        }
    // Enumerate every transversal with a mixed-radix counter.
    const size_t n = w.triples.size();
    std::vector<int> digit(n, 0);
    while (true) {
        Simplex s;
        for (size_t j = 0; j < n; ++j) s.push_back(w.triples[j][static_cast<size_t>(digit[j])]);
        std::sort(s.begin(), s.end());
        if (!k.is_face(s)) return false;
        size_t j = 0;
        while (j < n && ++digit[j] == 3) digit[j++] = 0;
        if (j == n) break;
    }
    return true;
}

}  // namespace kleinian
