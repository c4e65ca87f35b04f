#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "mvtest/kernels.hpp"
#include "mvtest/ref.hpp"
#include "mvtest/rng.hpp"

using namespace mvtest;

namespace {

ContinuousSample random_sample(std::int64_t n, int d, std::uint64_t seed) {
    Rng r(seed);
    ContinuousSample s(n, d);
    for (auto& v : s.data) v = r.uniform(-2.0, 2.0);
    return s;
}

double tree_length(const DistanceMatrix& dist, const std::vector<std::pair<std::int32_t, std::int32_t>>& edges) {
    double total = 0.0;
    for (const auto& [a, b] : edges) total += dist.at(a, b);
    return total;
}

}  // namespace

TEST_CASE("condensed distance matrix indexing") {
    ContinuousSample s(3, 1);
    s.data = {0.0, 1.0, 3.0};
    const auto dist = pairwise_distances(s);
    REQUIRE(dist.N == 3);
    REQUIRE(dist.d.size() == 3);
    CHECK(dist.at(0, 1) == doctest::Approx(1.0));
    CHECK(dist.at(1, 0) == doctest::Approx(1.0));
    CHECK(dist.at(0, 2) == doctest::Approx(3.0));
    CHECK(dist.at(1, 2) == doctest::Approx(2.0));
    CHECK(dist.at(2, 2) == 0.0);
}

TEST_CASE("pairwise distances match the nested-loop reference") {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto s = random_sample(41, 3, seed);
        const auto fast = pairwise_distances(s);
        const auto slow = ref::pairwise_distances(s);
        REQUIRE(fast.d.size() == slow.size());
        for (std::size_t i = 0; i < slow.size(); ++i) CHECK(fast.d[i] == doctest::Approx(slow[i]).epsilon(1e-14));
    }
}

TEST_CASE("dominance counts match the reference and include the point itself") {
    const auto s = random_sample(50, 2, 4);
    const auto fast = dominance_counts(s);
    const auto slow = ref::dominance_counts(s);
    REQUIRE(fast == slow);
    for (auto c : fast) CHECK(c >= 1);
}

TEST_CASE("knn list is sorted by distance with index tiebreak") {
    const auto s = random_sample(30, 2, 5);
    const auto dist = pairwise_distances(s);
    const auto fast = knn_indices(dist, 5);
    const auto slow = ref::knn_indices(s, 5);
    CHECK(fast == slow);
    for (std::int64_t i = 0; i < s.n; ++i)
        for (int k = 0; k + 1 < 5; ++k) {
            const double a = dist.at(i, fast[i * 5 + k]);
            const double b = dist.at(i, fast[i * 5 + k + 1]);
            CHECK(a <= b);
        }
}

TEST_CASE("knn tie resolution prefers the lower index") {
    // three collinear equidistant points: neighbors of the middle one tie
    ContinuousSample s(3, 1);
    s.data = {-1.0, 0.0, 1.0};
    const auto nn = knn_indices(pairwise_distances(s), 2);
    CHECK(nn[1 * 2 + 0] == 0);
    CHECK(nn[1 * 2 + 1] == 2);
}

TEST_CASE("minimum spanning tree matches Pruefer enumeration at N=5") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto s = random_sample(5, 2, 100 + seed);
        const auto dist = pairwise_distances(s);
        const auto fast = minimum_spanning_tree(dist);
        const auto brute = ref::minimum_spanning_tree_bruteforce(s);
        REQUIRE(fast.size() == 4);
        CHECK(tree_length(dist, fast) == doctest::Approx(tree_length(dist, brute)).epsilon(1e-12));
    }
}

TEST_CASE("minimum spanning tree is a spanning tree") {
    const auto s = random_sample(23, 3, 9);
    const auto edges = minimum_spanning_tree(pairwise_distances(s));
    REQUIRE(edges.size() == 22);
    // union-find connectivity
    std::vector<int> root(23);
    for (int i = 0; i < 23; ++i) root[i] = i;
    auto find = [&](int x) {
        while (root[x] != x) x = root[x] = root[root[x]];
        return x;
    };
    for (const auto& [a, b] : edges) {
        const int ra = find(a), rb = find(b);
        CHECK(ra != rb);  // no cycles
        root[ra] = rb;
    }
}

TEST_CASE("mst on duplicate points stays unique via the index tiebreak") {
    ContinuousSample s(4, 2);
    s.data = {0.5, 0.5, 0.5, 0.5, 1.5, 0.5, 0.5, 0.5};  // rows 0,1,3 identical
    const auto e1 = minimum_spanning_tree(pairwise_distances(s));
    const auto e2 = minimum_spanning_tree(pairwise_distances(s));
    CHECK(e1 == e2);
    CHECK(tree_length(pairwise_distances(s), e1) == doctest::Approx(1.0));
}

TEST_CASE("deterministic block sum is exactly thread-count independent") {
    const std::int64_t n = 100000;
    std::vector<double> vals(n);
    Rng r(77);
    for (auto& v : vals) v = r.uniform(-1.0, 1.0) * std::exp(r.uniform(0.0, 10.0));
    const int saved = omp_get_max_threads();
    omp_set_num_threads(1);
    const double s1 = det_block_sum(n, [&](std::int64_t i) { return vals[i]; });
    omp_set_num_threads(7);
    const double s7 = det_block_sum(n, [&](std::int64_t i) { return vals[i]; });
    omp_set_num_threads(saved);
    CHECK(s1 == s7);  // bitwise, not approx
}
