#pragma once

#include "kleinian/complexes.hpp"

#include <cstdint>
#include <vector>

namespace kleinian {

using IntMatrix = std::vector<std::vector<std::int64_t>>;

// Boundary map C_k -> C_{k-1} in the lexicographic simplex bases. For k = 0
// this is the augmentation C_0 -> Z (a single row of ones).
IntMatrix boundary_matrix(const SimplicialComplex& k, int dim);

// Diagonal of the Smith normal form (nonzero invariant factors, each
// dividing the next). Throws SizeCap on int64 overflow.
std::vector<std::int64_t> smith_diagonal(IntMatrix m);

struct HomologyResult {
    std::vector<long> betti;                         // reduced Betti numbers, index = degree
    std::vector<std::vector<std::int64_t>> torsion;  // torsion coefficients > 1 per degree
    long simplices = 0;
};

HomologyResult homology_ranks(const SimplicialComplex& k, long size_cap = 100000);

}  // namespace kleinian
