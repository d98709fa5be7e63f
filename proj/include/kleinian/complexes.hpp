#pragma once

#include "kleinian/configuration.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace kleinian {

using Label = std::string;
using Simplex = std::vector<int>;  // sorted vertex indices

// Finite simplicial complex given by its facets. Vertices are kept sorted by
// label; facets are sorted index lists, sorted lexicographically, and form an
// antichain.
class SimplicialComplex {
public:
    SimplicialComplex() = default;
    static SimplicialComplex from_facets(const std::vector<std::vector<Label>>& facets);

    const std::vector<Label>& vertices() const { return vertices_; }
    const std::vector<Simplex>& facets() const { return facets_; }
    std::vector<Label> facet_labels(size_t i) const;
    int dim() const;
    int vertex_index(const Label& l) const;  // -1 if absent
    // All k-dimensional faces in lexicographic order.
    std::vector<Simplex> simplices(int k) const;
    long simplex_count() const;
    bool is_face(const Simplex& s) const;

    bool operator==(const SimplicialComplex&) const = default;

private:
    std::vector<Label> vertices_;
    std::vector<Simplex> facets_;
};

SimplicialComplex discrete_complex(const std::vector<Label>& points);
// Facets {F1 u F2}. Labels shared by both inputs are made disjoint by
// suffixing ".1" / ".2".
SimplicialComplex join(const SimplicialComplex& k1, const SimplicialComplex& k2);
// Join of n copies of three points, vertex labels "p<j>_<i>".
SimplicialComplex join_power_k3(int n);
// True if the complexes agree after some bijection of vertex labels (brute force, small inputs).
bool isomorphic(const SimplicialComplex& a, const SimplicialComplex& b);

SimplicialComplex read_facets(std::istream& is);
void write_facets(std::ostream& os, const SimplicialComplex& k);

class Graph {
public:
    int add_vertex(const Label& l);  // returns existing index for a known label
    // Rejects loops; returns false for an existing edge.
    bool add_edge(int u, int v);
    bool add_edge(const Label& a, const Label& b) { return add_edge(add_vertex(a), add_vertex(b)); }
    bool has_edge(int u, int v) const;
    int vertex_index(const Label& l) const;

    int vertex_count() const { return static_cast<int>(labels_.size()); }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    const std::vector<Label>& labels() const { return labels_; }
    const std::vector<std::pair<int, int>>& edges() const { return edges_; }
    const std::vector<std::vector<int>>& adjacency() const { return adj_; }
    int degree(int v) const { return static_cast<int>(adj_[static_cast<size_t>(v)].size()); }

private:
    std::vector<Label> labels_;
    std::vector<std::pair<int, int>> edges_;
    std::vector<std::vector<int>> adj_;
    std::map<Label, int> index_;
};

Graph complete_graph(int k);
Graph complete_bipartite(int a, int b);
Graph one_skeleton(const SimplicialComplex& k);
// One edge per line: two whitespace-separated labels. Blank lines and lines
// starting with '#' are ignored; a lone label declares an isolated vertex.
Graph read_edge_list(std::istream& is);
void write_edge_list(std::ostream& os, const Graph& g);

// Boundary circles of the four planes of an n = 2 configuration, their
// pairwise intersection points as vertices and the arcs between consecutive
// points on each circle as edges.
struct CircleIncidence {
    Graph graph;
    std::vector<BoundaryPoint> points;           // indexed like graph vertices
    std::vector<std::vector<int>> circle_order;  // per plane, vertices in angular order
};
CircleIncidence circle_incidence(const Configuration& c);
inline Graph circle_incidence_graph(const Configuration& c) { return circle_incidence(c).graph; }

// Vertices: the 4n axis endpoints, labelled like "a1+". Facets: for each
// plane b, the cross-polytope facets of S_b (one endpoint per member axis).
SimplicialComplex incidence_complex(const Configuration& c);

// n pairwise disjoint vertex triples whose every transversal is a face.
struct JoinWitness {
    std::vector<std::array<int, 3>> triples;
};
std::optional<JoinWitness> contains_join_power(const SimplicialComplex& k, int n, int threads = 0);
bool verify_join_witness(const SimplicialComplex& k, const JoinWitness& w);

}  // namespace kleinian
