#pragma once

#include "kleinian/complexes.hpp"

#include <optional>
#include <string>
#include <vector>

namespace kleinian {

// A subdivision of K5 or K3,3 inside a graph: branch vertices plus one path
// per branch edge (vertex lists running between two branch vertices).
struct KuratowskiWitness {
    enum class Kind { K5, K33 };
    Kind kind = Kind::K5;
    std::vector<int> branch;
    std::vector<std::vector<int>> paths;
};

struct PlanarityResult {
    bool planar = true;
    std::optional<KuratowskiWitness> witness;
};

PlanarityResult is_planar(const Graph& g);

// Independent re-check of a witness against the graph; on failure `why`
// receives the reason.
bool verify_witness(const Graph& g, const KuratowskiWitness& w, std::string* why = nullptr);

std::string format_witness(const Graph& g, const KuratowskiWitness& w);

}  // namespace kleinian
