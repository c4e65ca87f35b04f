#pragma once

#include <cstdint>
#include <vector>

#include <omp.h>

#include "mvtest/sample.hpp"

namespace mvtest {

// Condensed upper-triangle Euclidean distance matrix over sample rows.
struct DistanceMatrix {
    std::int64_t N = 0;
    std::vector<double> d;  // N*(N-1)/2 entries, pair (i<j)

    std::size_t offset(std::int64_t i, std::int64_t j) const {
        // i < j required
        return static_cast<std::size_t>(i) * (2 * N - i - 1) / 2 + (j - i - 1);
    }
    double at(std::int64_t i, std::int64_t j) const {
        if (i == j) return 0.0;
        return i < j ? d[offset(i, j)] : d[offset(j, i)];
    }
};

// Deterministic parallel reduction: fixed chunk size, serial accumulation
// inside each chunk, serial combine in chunk order. The float result is
// bit-identical for every thread count, which plain omp reductions are not.
template <class F>
double det_block_sum(std::int64_t count, F&& term) {
    constexpr std::int64_t chunk = 4096;
    if (count <= 0) return 0.0;
    const std::int64_t nchunks = (count + chunk - 1) / chunk;
    std::vector<double> partial(static_cast<std::size_t>(nchunks));
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && nchunks > 1)
    for (std::int64_t c = 0; c < nchunks; ++c) {
        const std::int64_t begin = c * chunk;
        const std::int64_t end = std::min(count, begin + chunk);
        double acc = 0.0;
        for (std::int64_t i = begin; i < end; ++i) acc += term(i);
        partial[static_cast<std::size_t>(c)] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

DistanceMatrix pairwise_distances(const ContinuousSample& s);

// dom[i*N + j] = 1 when row j <= row i componentwise (includes j == i).
std::vector<std::uint8_t> dominance_matrix(const ContinuousSample& s);

// counts[i] = #{ j : row j <= row i componentwise }; always >= 1.
std::vector<std::int64_t> dominance_counts(const ContinuousSample& s);

// k nearest neighbors of every row (indices, self excluded), distance ties
// broken toward the lower index; row i occupies out[i*k .. i*k+k-1] in
// increasing (distance, index) order.
std::vector<std::int32_t> knn_indices(const DistanceMatrix& dist, int k);

// Minimum spanning tree edges by Prim in O(N^2); ties resolved by
// lexicographic (distance, min endpoint, max endpoint), so the tree is
// unique and thread-count independent.
std::vector<std::pair<std::int32_t, std::int32_t>> minimum_spanning_tree(const DistanceMatrix& dist);

}  // namespace mvtest
