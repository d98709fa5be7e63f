#include "doctest.h"

#include "kleinian/complexes.hpp"
#include "kleinian/configuration.hpp"
#include "kleinian/errors.hpp"
#include "kleinian/homology.hpp"
#include "kleinian/planarity.hpp"

#include "homology_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <sstream>

using namespace kleinian;
using namespace oracle;

namespace {

IntMatrix multiply(const IntMatrix& a, const IntMatrix& b) {
    if (a.empty() || b.empty()) return {};
    IntMatrix c(a.size(), std::vector<std::int64_t>(b[0].size(), 0));
    for (size_t i = 0; i < a.size(); ++i)
        for (size_t k = 0; k < b.size(); ++k)
            if (a[i][k])
                for (size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
    return c;
}

// Six-vertex triangulation of the real projective plane.
SimplicialComplex rp2() {
    return SimplicialComplex::from_facets({{"1", "2", "3"}, {"1", "3", "4"}, {"1", "4", "5"}, {"1", "5", "6"},
                                           {"1", "6", "2"}, {"2", "3", "5"}, {"3", "4", "6"}, {"4", "5", "2"},
                                           {"5", "6", "3"}, {"6", "2", "4"}});
}

// Wagner oracle: G is planar iff it has neither K5 nor K3,3 as a minor.
// Vertices are assigned to branch sets (or deleted) exhaustively.
bool has_minor(const Graph& g, int parts, const std::function<bool(int, int)>& need) {
    const int nv = g.vertex_count();
    std::vector<int> assign(static_cast<size_t>(nv), 0);  // 0 = deleted, 1..parts = branch set
    std::vector<std::uint32_t> adjmask(static_cast<size_t>(nv), 0);
    for (auto [u, v] : g.edges()) {
        adjmask[static_cast<size_t>(u)] |= 1u << v;
        adjmask[static_cast<size_t>(v)] |= 1u << u;
    }
    auto connected = [&](std::uint32_t set) {
        if (!set) return false;
        std::uint32_t seen = set & (~set + 1), frontier = seen;
        while (frontier) {
            std::uint32_t next = 0;
            for (int v = 0; v < nv; ++v)
                if (frontier & (1u << v)) next |= adjmask[static_cast<size_t>(v)] & set;
            frontier = next & ~seen;
            seen |= next;
        }
        return seen == set;
    };
    while (true) {
        std::vector<std::uint32_t> sets(static_cast<size_t>(parts) + 1, 0);
        for (int v = 0; v < nv; ++v) sets[static_cast<size_t>(assign[static_cast<size_t>(v)])] |= 1u << v;
        // Canonical labelling: the first vertex of set i precedes that of set i+1.
        bool ok = true;
        for (int i = 1; i < parts && ok; ++i)
            ok = sets[static_cast<size_t>(i)] && sets[static_cast<size_t>(i) + 1] &&
                 __builtin_ctz(sets[static_cast<size_t>(i)]) < __builtin_ctz(sets[static_cast<size_t>(i) + 1]);
        for (int i = 1; i <= parts && ok; ++i) ok = connected(sets[static_cast<size_t>(i)]);
        for (int i = 1; i <= parts && ok; ++i)
            for (int j = i + 1; j <= parts && ok; ++j) {
                if (!need(i - 1, j - 1)) continue;
                std::uint32_t nb = 0;
                for (int v = 0; v < nv; ++v)
                    if (sets[static_cast<size_t>(i)] & (1u << v)) nb |= adjmask[static_cast<size_t>(v)];
                ok = (nb & sets[static_cast<size_t>(j)]) != 0;
            }
        if (ok) return true;
        int v = 0;
        while (v < nv && ++assign[static_cast<size_t>(v)] > parts) assign[static_cast<size_t>(v++)] = 0;
        if (v == nv) return false;
    }
}

bool wagner_planar(const Graph& g) {
    if (g.vertex_count() < 5) return true;
    bool k5 = has_minor(g, 5, [](int, int) { return true; });
    if (k5) return false;
    if (g.vertex_count() < 6) return true;
    // K3,3 with parts {0,1,2} and {3,4,5}; the canonical labelling above can
    // put any vertex in any part, so test every bipartition of the 6 sets.
    for (int mask = 0; mask < 64; ++mask) {
        if (__builtin_popcount(static_cast<unsigned>(mask)) != 3 || !(mask & 1)) continue;
        if (has_minor(g, 6, [mask](int a, int b) { return ((mask >> a) & 1) != ((mask >> b) & 1); })) return false;
    }
    return true;
}

Graph random_graph(std::mt19937_64& rng, int nv, double p) {
    Graph g;
    for (int v = 0; v < nv; ++v) g.add_vertex("v" + std::to_string(v));
    std::bernoulli_distribution coin(p);
    for (int u = 0; u < nv; ++u)
        for (int v = u + 1; v < nv; ++v)
            if (coin(rng)) g.add_edge(u, v);
    return g;
}

}  // namespace

TEST_CASE("join of two three-point sets is K3,3") {
    SimplicialComplex k33 = join(discrete_complex({"a", "b", "c"}), discrete_complex({"x", "y", "z"}));
    CHECK(k33.vertices().size() == 6);
    CHECK(k33.facets().size() == 9);
    CHECK(k33.dim() == 1);
    Graph g = one_skeleton(k33);
    CHECK(g.edge_count() == 9);
    for (int v = 0; v < 6; ++v) CHECK(g.degree(v) == 3);
    CHECK(isomorphic(k33, join_power_k3(2)));
}

TEST_CASE("join with a point is a cone and join is associative") {
    SimplicialComplex tri = SimplicialComplex::from_facets({{"1", "2"}, {"2", "3"}, {"1", "3"}});
    SimplicialComplex cone = join(tri, discrete_complex({"apex"}));
    CHECK(cone.dim() == tri.dim() + 1);
    CHECK(cone.facets().size() == 3);
    for (const auto& f : cone.facets()) CHECK(std::count(f.begin(), f.end(), cone.vertex_index("apex")) == 1);

    // Shared labels are renamed apart rather than merged.
    SimplicialComplex self = join(discrete_complex({"p", "q"}), discrete_complex({"p", "q"}));
    CHECK(self.vertices().size() == 4);
    CHECK(self.facets().size() == 4);

    SimplicialComplex a = discrete_complex({"a1", "a2"});
    SimplicialComplex b = SimplicialComplex::from_facets({{"b1", "b2"}, {"b3"}});
    SimplicialComplex c = discrete_complex({"c1", "c2"});
    SimplicialComplex left = join(join(a, b), c), right = join(a, join(b, c));
    CHECK(left == right);
    CHECK(left.dim() == a.dim() + b.dim() + c.dim() + 2);
}

TEST_CASE("iterated joins of three points: sizes and dimension") {
    long facets = 1;
    for (int n = 1; n <= 5; ++n) {
        facets *= 3;
        SimplicialComplex k = join_power_k3(n);
        CHECK(k.vertices().size() == static_cast<size_t>(3 * n));
        CHECK(k.facets().size() == static_cast<size_t>(facets));
        CHECK(k.dim() == n - 1);
        for (const auto& f : k.facets()) CHECK(f.size() == static_cast<size_t>(n));
    }
    CHECK(join_power_k3(1).simplices(0).size() == 3);
    CHECK(join_power_k3(3).simplices(2).size() == 27);
    CHECK_THROWS_AS(join_power_k3(0), Error);
}

TEST_CASE("boundary of a boundary vanishes") {
    std::vector<SimplicialComplex> ks{join_power_k3(2), join_power_k3(3), join_power_k3(4), rp2(),
                                      SimplicialComplex::from_facets({{"a", "b", "c", "d"}})};
    for (const auto& k : ks)
        for (int d = 1; d <= k.dim(); ++d) {
            IntMatrix prod = multiply(boundary_matrix(k, d - 1), boundary_matrix(k, d));
            for (const auto& row : prod)
                for (auto x : row) CHECK(x == 0);
        }
}

TEST_CASE("reduced homology of iterated joins is a wedge of spheres") {
    for (int n = 1; n <= 4; ++n) {
        SimplicialComplex k = join_power_k3(n);
        HomologyResult h = homology_ranks(k);
        REQUIRE(h.betti.size() == static_cast<size_t>(n));
        for (int i = 0; i < n; ++i) {
            CHECK(h.betti[static_cast<size_t>(i)] == (i == n - 1 ? (1L << n) : 0L));
            CHECK(h.torsion[static_cast<size_t>(i)].empty());
        }
        // Independent oracle over two primes; torsion-free means they agree.
        for (std::int64_t p : {2LL, 1000000007LL}) CHECK(betti_mod(labels_of(k), p) == h.betti);
        // Euler characteristic: sum (-1)^i f_i - 1 equals the alternating Betti sum.
        long chi = -1, alt = 0;
        for (int i = 0; i <= k.dim(); ++i) {
            long f = static_cast<long>(k.simplices(i).size());
            chi += i % 2 ? -f : f;
            alt += i % 2 ? -h.betti[static_cast<size_t>(i)] : h.betti[static_cast<size_t>(i)];
        }
        CHECK(chi == alt);
    }
}

TEST_CASE("homology detects torsion and spheres") {
    HomologyResult h = homology_ranks(rp2());
    CHECK(h.betti == std::vector<long>{0, 0, 0});
    CHECK(h.torsion[1] == std::vector<std::int64_t>{2});
    CHECK(h.torsion[0].empty());
    // Over Z/2 the torsion shows up as rank.
    CHECK(betti_mod(labels_of(rp2()), 2) == std::vector<long>{0, 1, 1});
    CHECK(betti_mod(labels_of(rp2()), 1000000007) == h.betti);

    SimplicialComplex sphere =
        SimplicialComplex::from_facets({{"a", "b", "c"}, {"a", "b", "d"}, {"a", "c", "d"}, {"b", "c", "d"}});
    CHECK(homology_ranks(sphere).betti == std::vector<long>{0, 0, 1});
    CHECK(homology_ranks(discrete_complex({"x", "y", "z", "w"})).betti == std::vector<long>{3});
    CHECK(homology_ranks(SimplicialComplex::from_facets({{"a", "b", "c"}})).betti == std::vector<long>{0, 0, 0});

    try {
        homology_ranks(join_power_k3(5), 100);
        FAIL("size cap not enforced");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SizeCap);
    }
}

TEST_CASE("smith diagonal examples") {
    CHECK(smith_diagonal({{2, 4}, {6, 8}}) == std::vector<std::int64_t>{2, 4});
    CHECK(smith_diagonal({{0, 0}, {0, 0}}).empty());
    CHECK(smith_diagonal({{4, 6}}) == std::vector<std::int64_t>{2});
    CHECK(smith_diagonal({{2, 0}, {0, 3}}) == std::vector<std::int64_t>{1, 6});
}

TEST_CASE("planarity of small standard graphs") {
    CHECK(is_planar(complete_graph(4)).planar);
    CHECK(!is_planar(complete_graph(4)).witness);

    Graph k5 = complete_graph(5);
    PlanarityResult r5 = is_planar(k5);
    CHECK(!r5.planar);
    REQUIRE(r5.witness);
    CHECK(r5.witness->kind == KuratowskiWitness::Kind::K5);
    std::string why;
    CHECK(verify_witness(k5, *r5.witness, &why));

    Graph k33 = complete_bipartite(3, 3);
    PlanarityResult r33 = is_planar(k33);
    CHECK(!r33.planar);
    REQUIRE(r33.witness);
    CHECK(r33.witness->kind == KuratowskiWitness::Kind::K33);
    CHECK(verify_witness(k33, *r33.witness));
    CHECK(!format_witness(k33, *r33.witness).empty());

    // Petersen graph: nonplanar, no K5 subdivision needs degree 4, so K3,3.
    Graph pet;
    for (int i = 0; i < 5; ++i) {
        pet.add_edge("o" + std::to_string(i), "o" + std::to_string((i + 1) % 5));
        pet.add_edge("i" + std::to_string(i), "i" + std::to_string((i + 2) % 5));
        pet.add_edge("o" + std::to_string(i), "i" + std::to_string(i));
    }
    PlanarityResult rp = is_planar(pet);
    CHECK(!rp.planar);
    REQUIRE(rp.witness);
    CHECK(rp.witness->kind == KuratowskiWitness::Kind::K33);
    CHECK(verify_witness(pet, *rp.witness));
}

TEST_CASE("tampered witnesses are rejected") {
    Graph k33 = complete_bipartite(3, 3);
    KuratowskiWitness w = *is_planar(k33).witness;
    std::string why;

    KuratowskiWitness fewer = w;
    fewer.paths.pop_back();
    CHECK(!verify_witness(k33, fewer, &why));
    CHECK(!why.empty());

    KuratowskiWitness relabeled = w;
    relabeled.kind = KuratowskiWitness::Kind::K5;
    CHECK(!verify_witness(k33, relabeled));

    // Remove an edge the witness uses: the path no longer exists in the graph.
    Graph missing;
    for (const auto& l : k33.labels()) missing.add_vertex(l);
    const auto& p0 = w.paths.front();
    for (auto [u, v] : k33.edges())
        if (!((u == p0[0] && v == p0[1]) || (u == p0[1] && v == p0[0]))) missing.add_edge(u, v);
    CHECK(!verify_witness(missing, w));
}

TEST_CASE("planarity agrees with the Wagner minor oracle on random graphs") {
    std::mt19937_64 rng(51);
    int nonplanar = 0, planar = 0;
    for (int k = 0; k < 60; ++k) {
        int nv = 5 + k % 3;
        Graph g = random_graph(rng, nv, 0.5 + 0.06 * (k % 5));
        PlanarityResult r = is_planar(g);
        bool oracle = wagner_planar(g);
        CHECK(r.planar == oracle);
        if (r.planar) {
            ++planar;
            CHECK(g.edge_count() <= 3 * g.vertex_count() - 6);
        } else {
            ++nonplanar;
            REQUIRE(r.witness);
            std::string why;
            CHECK_MESSAGE(verify_witness(g, *r.witness, &why), why);
        }
    }
    CHECK(planar > 5);
    CHECK(nonplanar > 5);
}

TEST_CASE("circle incidence graph of the default two-factor configuration") {
    Configuration c = build_configuration(2);
    CircleIncidence ci = circle_incidence(c);
    const Graph& g = ci.graph;
    CHECK(g.vertex_count() == 8);
    CHECK(g.edge_count() == 16);
    for (int v = 0; v < 8; ++v) CHECK(g.degree(v) == 4);
    // Every vertex is an axis endpoint and lies on exactly two circles.
    std::set<Label> labels(g.labels().begin(), g.labels().end());
    CHECK(labels == std::set<Label>{"a1+", "a1-", "b1+", "b1-", "a2+", "a2-", "b2+", "b2-"});
    CHECK(ci.circle_order.size() == 4);
    std::vector<int> count(8, 0);
    for (const auto& order : ci.circle_order) {
        CHECK(order.size() == 4);
        for (int v : order) ++count[static_cast<size_t>(v)];
    }
    for (int x : count) CHECK(x == 2);

    PlanarityResult r = is_planar(g);
    CHECK(!r.planar);
    REQUIRE(r.witness);
    CHECK(r.witness->kind == KuratowskiWitness::Kind::K33);
    CHECK(verify_witness(g, *r.witness));
    CHECK(!wagner_planar(g));

    CHECK_THROWS_AS(circle_incidence(build_configuration(3)), Error);
}

TEST_CASE("incidence complexes contain the iterated join") {
    for (int n : {1, 2, 3}) {
        SimplicialComplex k = incidence_complex(build_configuration(n));
        CHECK(k.vertices().size() == static_cast<size_t>(4 * n));
        CHECK(k.dim() == n - 1);
        auto w = contains_join_power(k, n);
        REQUIRE(w);
        CHECK(w->triples.size() == static_cast<size_t>(n));
        CHECK(verify_join_witness(k, *w));
        // Independent re-check: the triples span a copy of the join.
        std::vector<std::vector<Label>> image;
        std::vector<size_t> digit(static_cast<size_t>(n), 0);
        while (true) {
            std::vector<Label> f;
            for (int j = 0; j < n; ++j)
                f.push_back(k.vertices()[static_cast<size_t>(w->triples[static_cast<size_t>(j)][digit[static_cast<size_t>(j)]])]);
            image.push_back(f);
            size_t j = 0;
            while (j < digit.size() && ++digit[j] == 3) digit[j++] = 0;
            if (j == digit.size()) break;
        }
        CHECK(image.size() == static_cast<size_t>(std::pow(3, n)));
        for (auto f : image) {
            Simplex s;
            for (const auto& l : f) s.push_back(k.vertex_index(l));
            std::sort(s.begin(), s.end());
            CHECK(k.is_face(s));
        }
    }
    // A complex with too few vertices has no copy.
    CHECK(!contains_join_power(join_power_k3(2), 3));
    CHECK(contains_join_power(join_power_k3(3), 3));
    JoinWitness bogus{{{0, 1, 2}, {0, 3, 4}}};
    CHECK(!verify_join_witness(join_power_k3(2), bogus));
}

TEST_CASE("facet and edge-list files round trip") {
    SimplicialComplex k = join_power_k3(3);
    std::stringstream ss;
    write_facets(ss, k);
    CHECK(read_facets(ss) == k);

    std::istringstream commented("# a comment\n\na b c\n  c d\n");
    SimplicialComplex r = read_facets(commented);
    CHECK(r.facets().size() == 2);
    CHECK(r.dim() == 2);
    std::istringstream empty("# nothing\n");
    CHECK_THROWS_AS(read_facets(empty), Error);

    Graph g = complete_bipartite(2, 3);
    g.add_vertex("lonely");
    std::stringstream es;
    write_edge_list(es, g);
    Graph back = read_edge_list(es);
    auto edge_set = [](const Graph& x) {
        std::set<std::pair<Label, Label>> out;
        for (auto [u, v] : x.edges()) {
            Label a = x.labels()[static_cast<size_t>(u)], b = x.labels()[static_cast<size_t>(v)];
            out.emplace(std::min(a, b), std::max(a, b));
        }
        return out;
    };
    CHECK(std::set<Label>(back.labels().begin(), back.labels().end()) ==
          std::set<Label>(g.labels().begin(), g.labels().end()));
    CHECK(edge_set(back) == edge_set(g));

    for (const char* bad : {"a a\n", "a b\na b\n", "a b c\n"}) {
        std::istringstream in(bad);
        try {
            read_edge_list(in);
            FAIL("accepted a bad edge list");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::ParseError);
        }
    }
    Graph loops;
    CHECK_THROWS_AS(loops.add_edge("x", "x"), Error);
    g.add_edge(0, 2);
    CHECK(g.has_edge(0, 2));
}
