#include "kleinian/homology.hpp"

#include "kleinian/errors.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>

namespace kleinian {

namespace {

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) throw Error(ErrorCode::SizeCap, "integer overflow in normal form");
    return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_sub_overflow(a, b, &r)) throw Error(ErrorCode::SizeCap, "integer overflow in normal form");
    return r;
}

// row_a -= q * row_b
void row_axpy(IntMatrix& m, size_t a, size_t b, std::int64_t q, size_t from) {
    for (size_t j = from; j < m[a].size(); ++j)
        if (m[b][j] != 0) m[a][j] = checked_sub(m[a][j], checked_mul(q, m[b][j]));
}

void col_axpy(IntMatrix& m, size_t a, size_t b, std::int64_t q, size_t from) {
    for (size_t i = from; i < m.size(); ++i)
        if (m[i][b] != 0) m[i][a] = checked_sub(m[i][a], checked_mul(q, m[i][b]));
}

long estimate_simplices(const SimplicialComplex& k, long cap) {
    long bound = 0;
    for (const auto& f : k.facets()) {
        if (f.size() >= 62) return cap + 1;
        bound += (1L << f.size()) - 1;
        if (bound > cap) break;
    }
    if (bound <= cap) return k.simplex_count();
    long exact = 0;
    for (int d = 0; d <= k.dim(); ++d) {
        exact += static_cast<long>(k.simplices(d).size());
        if (exact > cap) return exact;
    }
    return exact;
}

}  // namespace

IntMatrix boundary_matrix(const SimplicialComplex& k, int dim) {
    std::vector<Simplex> cols = k.simplices(dim);
    if (dim == 0) return IntMatrix(1, std::vector<std::int64_t>(cols.size(), 1));
    std::vector<Simplex> rows = k.simplices(dim - 1);
    std::map<Simplex, size_t> row_index;
    for (size_t i = 0; i < rows.size(); ++i) row_index.emplace(rows[i], i);
    IntMatrix m(rows.size(), std::vector<std::int64_t>(cols.size(), 0));
    for (size_t j = 0; j < cols.size(); ++j)
        for (size_t drop = 0; drop < cols[j].size(); ++drop) {
            Simplex face = cols[j];
            face.erase(face.begin() + static_cast<long>(drop));
            m[row_index.at(face)][j] = drop % 2 == 0 ? 1 : -1;
        }
    return m;
}

std::vector<std::int64_t> smith_diagonal(IntMatrix m) {
    std::vector<std::int64_t> diag;
    const size_t rows = m.size();
    const size_t cols = rows ? m[0].size() : 0;
    for (size_t t = 0; t < std::min(rows, cols); ++t) {
        // Pivot: smallest nonzero magnitude in the trailing block.
        while (true) {
            size_t pi = rows, pj = cols;
            std::int64_t best = 0;
            for (size_t i = t; i < rows; ++i)
                for (size_t j = t; j < cols; ++j)
                    if (m[i][j] != 0 && (best == 0 || std::llabs(m[i][j]) < best)) {
                        best = std::llabs(m[i][j]);
                        pi = i;
                        pj = j;
                    }
            if (best == 0) return diag;
            std::swap(m[t], m[pi]);
            for (auto& row : m) std::swap(row[t], row[pj]);

            bool clean = true;
            for (size_t i = t + 1; i < rows; ++i)
                if (m[i][t] != 0) {
                    row_axpy(m, i, t, m[i][t] / m[t][t], t);
                    clean = clean && m[i][t] == 0;
                }
            for (size_t j = t + 1; j < cols; ++j)
                if (m[t][j] != 0) {
                    col_axpy(m, j, t, m[t][j] / m[t][t], t);
                    clean = clean && m[t][j] == 0;
                }
            if (!clean) continue;
            // Divisibility: fold any entry not divisible by the pivot into row t.
            size_t bad = rows;
            for (size_t i = t + 1; i < rows && bad == rows; ++i)
                for (size_t j = t + 1; j < cols; ++j)
                    if (m[i][j] % m[t][t] != 0) {
                        bad = i;
                        break;
                    }
            if (bad == rows) break;
            for (size_t j = t; j < cols; ++j) m[t][j] = checked_sub(m[t][j], -m[bad][j]);
        }
        diag.push_back(std::llabs(m[t][t]));
    }
    return diag;
}

HomologyResult homology_ranks(const SimplicialComplex& k, long size_cap) {
    if (k.facets().empty()) throw Error(ErrorCode::InvalidParameters, "complex is empty");
    HomologyResult r;
    r.simplices = estimate_simplices(k, size_cap);
    if (r.simplices > size_cap)
        throw Error(ErrorCode::SizeCap, "complex has more than " + std::to_string(size_cap) + " simplices");
    const int d = k.dim();
    // rank[i] = rank of the boundary C_i -> C_{i-1} (augmentation at i = 0).
    std::vector<long> rank(static_cast<size_t>(d) + 2, 0), chains(static_cast<size_t>(d) + 1, 0);
    std::vector<std::vector<std::int64_t>> divisors(static_cast<size_t>(d) + 2);
    for (int i = 0; i <= d; ++i) {
        IntMatrix b = boundary_matrix(k, i);
        chains[static_cast<size_t>(i)] = b.empty() ? 0 : static_cast<long>(b[0].size());
        divisors[static_cast<size_t>(i)] = smith_diagonal(std::move(b));
        rank[static_cast<size_t>(i)] = static_cast<long>(divisors[static_cast<size_t>(i)].size());
    }
    for (int i = 0; i <= d; ++i) {
        r.betti.push_back(chains[static_cast<size_t>(i)] - rank[static_cast<size_t>(i)] - rank[static_cast<size_t>(i) + 1]);
        std::vector<std::int64_t> tors;
        for (std::int64_t x : divisors[static_cast<size_t>(i) + 1])
            if (x > 1) tors.push_back(x);
        r.torsion.push_back(std::move(tors));
    }
    return r;
}

}  // namespace kleinian
