#include <cmath>
#include <vector>

#include "doctest.h"
#include "mvtest/density_gof.hpp"
#include "mvtest/edf_gof.hpp"
#include "mvtest/errors.hpp"
#include "mvtest/rng.hpp"
#include "mvtest/rosenblatt.hpp"

using namespace mvtest;

namespace {

ContinuousSample from_rows(const std::vector<std::vector<double>>& rows) {
    ContinuousSample s(static_cast<std::int64_t>(rows.size()), static_cast<int>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < rows[i].size(); ++k) s.at(static_cast<std::int64_t>(i), static_cast<int>(k)) = rows[i][k];
    return s;
}

// conditional cdf of v given u for the Clayton copula
double clayton_cond(double u, double v, double theta) {
    return std::pow(u, -theta - 1.0) *
           std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0, -1.0 / theta - 1.0);
}

}  // namespace

TEST_CASE("transform of independent uniforms is the identity") {
    const auto s = from_rows({{0.25, 0.75}, {0.5, 0.5}, {0.9, 0.1}, {0.123, 0.456}});
    const auto u = rosenblatt_2d(s, make_uniform(2));
    for (std::int64_t i = 0; i < s.n; ++i) {
        CHECK(u.at(i, 0) == doctest::Approx(s.at(i, 0)).epsilon(1e-9));
        CHECK(u.at(i, 1) == doctest::Approx(s.at(i, 1)).epsilon(1e-9));
    }
}

TEST_CASE("conditional coordinate matches the closed-form copula conditional") {
    const double theta = 2.0;
    const NullModel m = make_clayton(theta);
    const auto s = from_rows({{0.3, 0.6}, {0.7, 0.2}, {0.5, 0.5}, {0.85, 0.9}});
    const auto u = rosenblatt_2d(s, m);
    for (std::int64_t i = 0; i < s.n; ++i) {
        CHECK(u.at(i, 0) == doctest::Approx(s.at(i, 0)).epsilon(1e-7));
        CHECK(u.at(i, 1) == doctest::Approx(clayton_cond(s.at(i, 0), s.at(i, 1), theta)).epsilon(1e-6));
    }
}

TEST_CASE("transform of a dependent sample by its own model looks independent") {
    const double theta = 3.0;
    const NullModel m = make_clayton(theta);
    Rng r(77);
    ContinuousSample s(400, 2);
    for (std::int64_t i = 0; i < 400; ++i) {
        const double a = r.uniform(), b = r.uniform();
        s.at(i, 0) = a;
        s.at(i, 1) = copula::clayton_cond_inv(a, b, theta);
    }
    const auto u = rosenblatt_2d(s, m);
    // each coordinate separately uniform and jointly independent
    std::vector<double> c1, c2;
    for (std::int64_t i = 0; i < 400; ++i) {
        c1.push_back(u.at(i, 0));
        c2.push_back(u.at(i, 1));
    }
    CHECK(uniform_ks_stat(c1) < 0.07);
    CHECK(uniform_ks_stat(c2) < 0.07);
    CHECK(qks_stat(edf_pairs(u, make_uniform(2))) < 0.09);
    // without the transform the raw sample is far from independent
    CHECK(qks_stat(edf_pairs(s, make_uniform(2))) > 0.15);
}

TEST_CASE("vanishing marginal density is reported") {
    const auto s = from_rows({{2.0, 0.5}, {0.5, 0.5}});
    CHECK_THROWS_AS(rosenblatt_2d(s, make_uniform(2)), NumericError);
    ContinuousSample d3(4, 3);
    CHECK_THROWS_AS(rosenblatt_2d(d3, make_uniform(3)), CapabilityError);
}

TEST_CASE("transformed ks equals the plain edf ks when the transform is trivial") {
    Rng r(5);
    ContinuousSample s(80, 2);
    for (auto& v : s.data) v = 0.02 + 0.96 * r.uniform();
    CHECK(ff_stat(s, make_uniform(2)) == doctest::Approx(qks_stat(edf_pairs(s, make_uniform(2)))).epsilon(1e-9));
}

TEST_CASE("default radius grid is twenty steps up to a quarter") {
    const auto r = default_rk_radii();
    REQUIRE(r.size() == 20);
    CHECK(r.front() == doctest::Approx(0.0125));
    CHECK(r.back() == doctest::Approx(0.25));
    for (std::size_t k = 1; k < r.size(); ++k)
        CHECK(r[k] - r[k - 1] == doctest::Approx(0.0125).epsilon(1e-12));
}

TEST_CASE("pair-counting estimate on a hand triangle") {
    const auto pts = from_rows({{0.0, 0.0}, {0.3, 0.0}, {0.0, 0.4}});
    // pairwise distances 0.3, 0.4, 0.5; counting is strict
    const auto k = ripley_khat(pts, {0.2, 0.3, 0.35, 0.45, 0.55});
    CHECK(k[0] == doctest::Approx(0.0));
    CHECK(k[1] == doctest::Approx(0.0));
    CHECK(k[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(k[3] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(k[4] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(ripley_khat(pts, {}), ValidationError);
}

TEST_CASE("pair counts follow the square line-picking law") {
    Rng r(31);
    ContinuousSample s(500, 2);
    for (auto& v : s.data) v = r.uniform();
    const auto k = ripley_khat(s, {0.1, 0.25});
    // P(|X-Y| < r) = pi r^2 - 8/3 r^3 + 1/2 r^4 for uniforms on the square
    auto exact = [](double r) { return std::acos(-1.0) * r * r - 8.0 / 3.0 * r * r * r + 0.5 * r * r * r * r; };
    CHECK(k[0] == doctest::Approx(exact(0.1)).epsilon(0.35));
    CHECK(std::abs(k[1] - exact(0.25)) < 0.02);
}

TEST_CASE("quadratic radius statistic from the same hand triangle") {
    const auto pts = from_rows({{0.0, 0.0}, {0.3, 0.0}, {0.0, 0.4}});
    const double pi = std::acos(-1.0);
    const double e = 1.0 / 3.0 - pi * 0.35 * 0.35;
    CHECK(ripley_k_stat(pts, make_uniform(2), {0.35}) == doctest::Approx(e * e).epsilon(1e-9));
}

TEST_CASE("transform-based tests accept the null and reject clustering") {
    RngPlan plan{4242};
    Rng r = plan.stream(0);
    ContinuousSample good(60, 2);
    for (auto& v : good.data) v = r.uniform();
    ContinuousSample bad(60, 2);
    for (auto& v : bad.data) v = 0.4 + 0.2 * r.uniform();

    const auto ff_ok = ff_test(good, make_uniform(2), 99, plan.sub(1));
    CHECK(ff_ok.method == std::string("FF"));
    CHECK(ff_ok.kind == PValueKind::bootstrap);
    CHECK(ff_ok.pvalue > 0.01);
    const auto ff_bad = ff_test(bad, make_uniform(2), 99, plan.sub(2));
    CHECK(ff_bad.pvalue == doctest::Approx(0.01));

    const auto radii = default_rk_radii();
    const auto rk_ok = ripley_k_test(good, make_uniform(2), radii, 99, plan.sub(3));
    CHECK(rk_ok.method == std::string("RK"));
    CHECK(rk_ok.pvalue > 0.01);
    const auto rk_bad = ripley_k_test(bad, make_uniform(2), radii, 99, plan.sub(4));
    CHECK(rk_bad.pvalue == doctest::Approx(0.01));
}
