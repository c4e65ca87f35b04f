#include "mvtest/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvtest/errors.hpp"

namespace mvtest {

DistanceMatrix pairwise_distances(const ContinuousSample& s) {
    DistanceMatrix out;
    out.N = s.n;
    out.d.resize(static_cast<std::size_t>(s.n) * (s.n - 1) / 2);
    const int d = s.d;
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && s.n > 64)
    for (std::int64_t i = 0; i < s.n - 1; ++i) {
        const double* ri = s.data.data() + static_cast<std::size_t>(i) * d;
        std::size_t off = out.offset(i, i + 1);
        for (std::int64_t j = i + 1; j < s.n; ++j, ++off) {
            const double* rj = s.data.data() + static_cast<std::size_t>(j) * d;
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                const double e = ri[k] - rj[k];
                acc += e * e;
            }
            out.d[off] = std::sqrt(acc);
        }
    }
    return out;
}

std::vector<std::uint8_t> dominance_matrix(const ContinuousSample& s) {
    const std::int64_t n = s.n;
    const int d = s.d;
    std::vector<std::uint8_t> dom(static_cast<std::size_t>(n) * n);
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && n > 64)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* ri = s.data.data() + static_cast<std::size_t>(i) * d;
        std::uint8_t* row = dom.data() + static_cast<std::size_t>(i) * n;
        for (std::int64_t j = 0; j < n; ++j) {
            const double* rj = s.data.data() + static_cast<std::size_t>(j) * d;
            std::uint8_t ok = 1;
            for (int k = 0; k < d; ++k) ok &= static_cast<std::uint8_t>(rj[k] <= ri[k]);
            row[j] = ok;
        }
    }
    return dom;
}

std::vector<std::int64_t> dominance_counts(const ContinuousSample& s) {
    const std::int64_t n = s.n;
    const int d = s.d;
    std::vector<std::int64_t> counts(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && n > 64)
    for (std::int64_t i = 0; i < n; ++i) {
        const double* ri = s.data.data() + static_cast<std::size_t>(i) * d;
        std::int64_t c = 0;
        for (std::int64_t j = 0; j < n; ++j) {
            const double* rj = s.data.data() + static_cast<std::size_t>(j) * d;
            bool ok = true;
            for (int k = 0; k < d; ++k)
                if (rj[k] > ri[k]) {
                    ok = false;
                    break;
                }
            c += ok;
        }
        counts[static_cast<std::size_t>(i)] = c;
    }
    return counts;
}

std::vector<std::int32_t> knn_indices(const DistanceMatrix& dist, int k) {
    const std::int64_t N = dist.N;
    if (k < 1 || k >= N) throw ValidationError("knn_indices: need 1 <= k < N");
    std::vector<std::int32_t> out(static_cast<std::size_t>(N) * k);
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && N > 64)
    for (std::int64_t i = 0; i < N; ++i) {
        std::vector<std::pair<double, std::int32_t>> cand;
        cand.reserve(static_cast<std::size_t>(N - 1));
        for (std::int64_t j = 0; j < N; ++j)
            if (j != i) cand.emplace_back(dist.at(i, j), static_cast<std::int32_t>(j));
        std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
        for (int t = 0; t < k; ++t) out[static_cast<std::size_t>(i) * k + t] = cand[static_cast<std::size_t>(t)].second;
    }
    return out;
}

std::vector<std::pair<std::int32_t, std::int32_t>> minimum_spanning_tree(const DistanceMatrix& dist) {
    const std::int64_t N = dist.N;
    if (N < 2) throw ValidationError("minimum_spanning_tree: need at least 2 points");
    std::vector<double> best(static_cast<std::size_t>(N), std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> from(static_cast<std::size_t>(N), -1);
    std::vector<std::uint8_t> in_tree(static_cast<std::size_t>(N), 0);
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    edges.reserve(static_cast<std::size_t>(N - 1));

    auto edge_key = [](double w, std::int64_t a, std::int64_t b) {
        return std::make_tuple(w, std::min(a, b), std::max(a, b));
    };

    in_tree[0] = 1;
    for (std::int64_t j = 1; j < N; ++j) {
        best[static_cast<std::size_t>(j)] = dist.at(0, j);
        from[static_cast<std::size_t>(j)] = 0;
    }
    for (std::int64_t step = 1; step < N; ++step) {
        std::int64_t pick = -1;
        for (std::int64_t v = 0; v < N; ++v) {
            if (in_tree[static_cast<std::size_t>(v)]) continue;
            if (pick < 0 || edge_key(best[static_cast<std::size_t>(v)], from[static_cast<std::size_t>(v)], v) <
                                edge_key(best[static_cast<std::size_t>(pick)], from[static_cast<std::size_t>(pick)], pick))
                pick = v;
        }
        in_tree[static_cast<std::size_t>(pick)] = 1;
        const std::int32_t a = from[static_cast<std::size_t>(pick)];
        edges.emplace_back(std::min<std::int32_t>(a, static_cast<std::int32_t>(pick)),
                           std::max<std::int32_t>(a, static_cast<std::int32_t>(pick)));
        for (std::int64_t v = 0; v < N; ++v) {
            if (in_tree[static_cast<std::size_t>(v)]) continue;
            const double w = dist.at(pick, v);
            if (edge_key(w, pick, v) <
                edge_key(best[static_cast<std::size_t>(v)], from[static_cast<std::size_t>(v)], v)) {
                best[static_cast<std::size_t>(v)] = w;
                from[static_cast<std::size_t>(v)] = static_cast<std::int32_t>(pick);
            }
        }
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

}  // namespace mvtest
