#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "mvtest/errors.hpp"
#include "mvtest/rng.hpp"

using namespace mvtest;

TEST_CASE("same seed, same sequence") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("plan streams depend on index only, not draw order") {
    RngPlan plan{7};
    Rng s3 = plan.stream(3);
    const std::uint64_t first = s3.next();
    // claiming other streams first must not disturb stream 3
    plan.stream(0).next();
    plan.stream(9).next();
    CHECK(plan.stream(3).next() == first);
}

TEST_CASE("distinct stream indices and sub tags decorrelate") {
    RngPlan plan{7};
    CHECK(plan.stream(0).next() != plan.stream(1).next());
    CHECK(plan.sub(0).master_seed != plan.sub(1).master_seed);
    CHECK(plan.sub(0).master_seed != plan.master_seed);
    // sub-plan space disjoint from stream space
    CHECK(plan.sub(5).stream(0).next() != plan.stream(5).next());
}

TEST_CASE("uniform lies in [0,1) with mean 1/2") {
    Rng r(1);
    double sum = 0.0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        REQUIRE(u >= 0.0);
        REQUIRE(u < 1.0);
        sum += u;
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("uniform(lo,hi) respects the interval") {
    Rng r(2);
    for (int i = 0; i < 1000; ++i) {
        const double u = r.uniform(-3.0, -1.0);
        CHECK(u >= -3.0);
        CHECK(u < -1.0);
    }
}

TEST_CASE("uniform_int covers 0..n-1 without bias toward any residue") {
    Rng r(3);
    std::vector<int> hits(7, 0);
    for (int i = 0; i < 70000; ++i) ++hits[r.uniform_int(7)];
    for (int k = 0; k < 7; ++k) CHECK(hits[k] == doctest::Approx(10000).epsilon(0.05));
    Rng one(4);
    for (int i = 0; i < 50; ++i) CHECK(one.uniform_int(1) == 0);
    CHECK_THROWS_AS(r.uniform_int(0), ValidationError);
}

TEST_CASE("normal moments") {
    Rng r(5);
    double s1 = 0.0, s2 = 0.0, s3 = 0.0;
    const int n = 40000;
    for (int i = 0; i < n; ++i) {
        const double z = r.normal();
        s1 += z;
        s2 += z * z;
        s3 += z * z * z;
    }
    CHECK(s1 / n == doctest::Approx(0.0).epsilon(1).scale(0.02));
    CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.03));
    CHECK(s3 / n == doctest::Approx(0.0).epsilon(1).scale(0.05));
}

TEST_CASE("poisson matches exact pmf at small rate") {
    Rng r(6);
    const double rate = 2.5;
    const int n = 50000;
    std::vector<int> hits(40, 0);
    for (int i = 0; i < n; ++i) ++hits[std::min<std::int64_t>(39, r.poisson(rate))];
    double p = std::exp(-rate);
    for (int k = 0; k < 10; ++k) {
        const double expect = n * p;
        if (expect > 100) CHECK(hits[k] == doctest::Approx(expect).epsilon(0.1));
        p *= rate / (k + 1);
    }
}

TEST_CASE("poisson splitting keeps the mean at large rate") {
    Rng r(7);
    const double rate = 3000.0;  // forces the recursive split path
    double sum = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) sum += static_cast<double>(r.poisson(rate));
    // sd of the mean = sqrt(rate/n) ~ 1.22
    CHECK(sum / n == doctest::Approx(rate).epsilon(0.005));
    CHECK_THROWS_AS(r.poisson(0.0), ValidationError);
}

TEST_CASE("hash64 is FNV-1a") {
    CHECK(hash64("") == 14695981039346656037ull);
    CHECK(hash64("a") == 12638187200555641996ull);
    CHECK(hash64("power") != hash64("null"));
}

TEST_CASE("sample_mask draws exactly m distinct members") {
    Rng r(8);
    for (int t = 0; t < 200; ++t) {
        const auto mask = sample_mask(10, 4, r);
        REQUIRE(mask.size() == 10);
        CHECK(std::accumulate(mask.begin(), mask.end(), 0) == 4);
    }
    CHECK_THROWS_AS(sample_mask(3, 4, r), ValidationError);
}

TEST_CASE("sample_mask reaches every subset") {
    Rng r(9);
    std::vector<int> seen(1 << 4, 0);
    for (int t = 0; t < 3000; ++t) {
        const auto mask = sample_mask(4, 2, r);
        int code = 0;
        for (int i = 0; i < 4; ++i) code |= mask[i] << i;
        ++seen[code];
    }
    int nonzero = 0;
    for (int c = 0; c < 16; ++c) nonzero += seen[c] > 0;
    CHECK(nonzero == 6);  // C(4,2) patterns, nothing else
}

TEST_CASE("per-index streams give identical results under any thread count") {
    const int n = 512;
    RngPlan plan{31};
    std::vector<double> serial(n), parallel(n);
    for (int i = 0; i < n; ++i) {
        Rng r = plan.stream(static_cast<std::uint64_t>(i));
        serial[i] = r.uniform() + r.normal();
    }
    const int saved = omp_get_max_threads();
    omp_set_num_threads(3);
#pragma omp parallel for schedule(dynamic)
    for (int i = 0; i < n; ++i) {
        Rng r = plan.stream(static_cast<std::uint64_t>(i));
        parallel[i] = r.uniform() + r.normal();
    }
    omp_set_num_threads(saved);
    CHECK(serial == parallel);
}
