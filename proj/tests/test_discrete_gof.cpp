#include <atomic>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvtest/discrete_gof.hpp"
#include "mvtest/errors.hpp"
#include "mvtest/rng.hpp"

using namespace mvtest;

namespace {

DiscreteGridSample grid22(std::vector<std::int64_t> counts) {
    DiscreteGridSample s;
    s.valsx = {0.0, 1.0};
    s.valsy = {0.0, 1.0};
    s.counts = std::move(counts);
    return s;
}

GridExpectation uniform_e(double per_cell, std::size_t cells) {
    GridExpectation e;
    e.expected.assign(cells, per_cell);
    e.n = per_cell * static_cast<double>(cells);
    return e;
}

}  // namespace

TEST_CASE("divergence statistics on a frozen diagonal table") {
    // counts 10,0 / 0,10 against a flat expectation of 5 per cell
    const auto s = grid22({10, 0, 0, 10});
    const auto e = uniform_e(5.0, 4);
    CHECK(disc_stat(DiscFlavor::P, s, e) == doctest::Approx(20.0).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::TV, s, e) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::KL, s, e) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::H, s, e) == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("cdf-type statistics on the same table") {
    const auto s = grid22({10, 0, 0, 10});
    const auto e = uniform_e(5.0, 4);
    CHECK(disc_stat(DiscFlavor::KS, s, e) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::K, s, e) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::CvM, s, e) == doctest::Approx(0.0625).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::AD, s, e) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("kuiper adds the two one-sided deviations") {
    const auto s = grid22({6, 2, 2, 10});
    const auto e = uniform_e(5.0, 4);
    // cumulative differences F - Fhat: {-0.05, 0.1, 0.1, 0}
    CHECK(disc_stat(DiscFlavor::KS, s, e) == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(disc_stat(DiscFlavor::K, s, e) == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("grid cdfs cumulate x-fastest rectangles") {
    DiscreteGridSample s;
    s.valsx = {0.0, 1.0, 2.0};
    s.valsy = {0.0, 1.0};
    s.counts = {1, 2, 3, 4, 5, 6};  // total 21
    const auto e = uniform_e(3.5, 6);
    const auto c = grid_cdfs(s, e);
    REQUIRE(c.fhat.size() == 6);
    CHECK(c.fhat[0] == doctest::Approx(1.0 / 21).epsilon(1e-12));
    CHECK(c.fhat[1] == doctest::Approx(3.0 / 21).epsilon(1e-12));
    CHECK(c.fhat[2] == doctest::Approx(6.0 / 21).epsilon(1e-12));
    CHECK(c.fhat[3] == doctest::Approx(5.0 / 21).epsilon(1e-12));
    CHECK(c.fhat[4] == doctest::Approx(12.0 / 21).epsilon(1e-12));  // 1+2+4+5
    CHECK(c.fhat[5] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.f[4] == doctest::Approx(4.0 / 6.0).epsilon(1e-12));
    CHECK(c.f[5] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("expectations rescale to the observed total") {
    const auto s = grid22({10, 0, 0, 10});
    // same flat null given as probabilities instead of counts
    GridExpectation p;
    p.expected.assign(4, 0.25);
    p.n = 1.0;
    const auto e = uniform_e(5.0, 4);
    for (DiscFlavor f : {DiscFlavor::P, DiscFlavor::TV, DiscFlavor::KL, DiscFlavor::H, DiscFlavor::KS})
        CHECK(disc_stat(f, s, p) == doctest::Approx(disc_stat(f, s, e)).epsilon(1e-12));
}

TEST_CASE("zero expected cells") {
    const auto s = grid22({10, 0, 0, 10});
    GridExpectation e;
    e.expected = {10.0, 0.0, 0.0, 10.0};
    e.n = 20.0;
    // observed mass only where expected mass lives: fine
    CHECK(disc_stat(DiscFlavor::P, s, e) == doctest::Approx(0.0));
    CHECK(disc_stat(DiscFlavor::KL, s, e) == doctest::Approx(0.0));
    // observed count in a zero-expectation cell: undefined
    const auto bad = grid22({10, 1, 0, 9});
    CHECK_THROWS_AS(disc_stat(DiscFlavor::P, bad, e), NumericError);
    CHECK_THROWS_AS(disc_stat(DiscFlavor::KL, bad, e), NumericError);
}

TEST_CASE("shape mismatches are rejected") {
    const auto s = grid22({10, 0, 0, 10});
    CHECK_THROWS_AS(disc_stat(DiscFlavor::P, s, uniform_e(5.0, 6)), ValidationError);
    GridExpectation zero;
    zero.expected.assign(4, 0.0);
    zero.n = 0.0;
    CHECK_THROWS_AS(disc_stat(DiscFlavor::P, s, zero), ValidationError);
}

TEST_CASE("statistic tags") {
    CHECK(disc_tag(DiscFlavor::KS) == std::string("KS"));
    CHECK(disc_tag(DiscFlavor::K) == std::string("K"));
    CHECK(disc_tag(DiscFlavor::CvM) == std::string("CvM"));
    CHECK(disc_tag(DiscFlavor::AD) == std::string("AD"));
    CHECK(disc_tag(DiscFlavor::P) == std::string("P"));
    CHECK(disc_tag(DiscFlavor::TV) == std::string("TV"));
    CHECK(disc_tag(DiscFlavor::KL) == std::string("KL"));
    CHECK(disc_tag(DiscFlavor::H) == std::string("H"));
}

TEST_CASE("categorical draws keep the total and follow the weights") {
    Rng r(7);
    const std::vector<double> w = {2.0, 1.0, 1.0};  // unnormalized
    std::vector<double> mean(3, 0.0);
    for (int rep = 0; rep < 400; ++rep) {
        const auto c = multinomial_draw(40, w, r);
        REQUIRE(c.size() == 3);
        CHECK(c[0] + c[1] + c[2] == 40);
        for (int k = 0; k < 3; ++k) mean[static_cast<std::size_t>(k)] += static_cast<double>(c[k]);
    }
    for (int k = 0; k < 3; ++k) mean[static_cast<std::size_t>(k)] /= 400.0;
    CHECK(mean[0] == doctest::Approx(20.0).epsilon(0.05));
    CHECK(mean[1] == doctest::Approx(10.0).epsilon(0.08));
    CHECK(mean[2] == doctest::Approx(10.0).epsilon(0.08));

    Rng a(5), b(5);
    CHECK(multinomial_draw(25, w, a) == multinomial_draw(25, w, b));
    CHECK_THROWS_AS(multinomial_draw(5, {1.0, -0.5}, r), ValidationError);
    CHECK_THROWS_AS(multinomial_draw(5, {0.0, 0.0}, r), ValidationError);
}

TEST_CASE("fixed expectation ignores the sample") {
    const auto e = uniform_e(5.0, 4);
    const auto out = fixed_expectation(e, grid22({1, 2, 3, 4}));
    CHECK(out.expected == e.expected);
    CHECK(out.n == e.n);
}

TEST_CASE("simulated calibration accepts the null and rejects a shift") {
    DiscreteGridSample s;
    s.valsx = {0.0, 1.0, 2.0};
    s.valsy = {0.0, 1.0, 2.0};
    s.counts = {24, 20, 22, 19, 23, 21, 20, 25, 26};  // near-flat, total 200
    const auto e = uniform_e(200.0 / 9.0, 9);
    RngPlan plan{555};
    const auto ok = discrete_gof_test(s, [&](const DiscreteGridSample&) { return e; }, DiscFlavor::P, 199, plan);
    CHECK(ok.method == std::string("P"));
    CHECK(ok.kind == PValueKind::bootstrap);
    CHECK(ok.replicates == 199);
    CHECK(ok.pvalue > 0.05);

    DiscreteGridSample far = s;
    far.counts = {120, 5, 5, 5, 30, 5, 5, 5, 20};
    const auto rej = discrete_gof_test(far, [&](const DiscreteGridSample&) { return e; }, DiscFlavor::P, 199, plan);
    CHECK(rej.pvalue == doctest::Approx(1.0 / 200.0));
}

TEST_CASE("battery shares replicates and matches the single-flavor runner") {
    DiscreteGridSample s;
    s.valsx = {0.0, 1.0};
    s.valsy = {0.0, 1.0, 2.0};
    s.counts = {30, 31, 28, 35, 36, 40};
    const auto e = uniform_e(200.0 / 6.0, 6);
    const std::vector<DiscFlavor> flavors = {DiscFlavor::P, DiscFlavor::TV, DiscFlavor::KL,
                                             DiscFlavor::H, DiscFlavor::KS, DiscFlavor::AD};
    RngPlan plan{808};
    const auto batch = discrete_gof_battery(s, [&](const DiscreteGridSample&) { return e; }, flavors, 299, plan);
    REQUIRE(batch.size() == flavors.size());
    for (std::size_t k = 0; k < batch.size(); ++k) {
        CHECK(batch[k].method == std::string(disc_tag(flavors[k])));
        CHECK(batch[k].replicates == 299);
        CHECK(batch[k].pvalue >= 1.0 / 300.0);
        CHECK(batch[k].pvalue <= 1.0);
        // same plan, same replicate stream: the solo run must agree exactly
        const auto solo = discrete_gof_test(s, [&](const DiscreteGridSample&) { return e; }, flavors[k], 299, plan);
        CHECK(solo.pvalue == batch[k].pvalue);
        CHECK(solo.statistic == batch[k].statistic);
    }
}

TEST_CASE("composite expectations are re-evaluated on every replicate") {
    DiscreteGridSample s;
    s.valsx = {0.0, 1.0};
    s.valsy = {0.0, 1.0};
    s.counts = {20, 25, 30, 25};
    std::atomic<int> calls{0};
    const auto e = uniform_e(25.0, 4);
    const ExpectationFn fn = [&](const DiscreteGridSample&) {
        ++calls;
        return e;
    };
    discrete_gof_test(s, fn, DiscFlavor::P, 50, RngPlan{9});
    CHECK(calls.load() == 51);  // observed sample + one per replicate
}
