#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "mvtest/case_studies.hpp"
#include "mvtest/density_gof.hpp"
#include "mvtest/discrete_gof.hpp"
#include "mvtest/rng.hpp"
#include "mvtest/twosample.hpp"

using namespace mvtest;

namespace {

double marginal_ks(const ContinuousSample& s, int k) {
    std::vector<double> v(static_cast<std::size_t>(s.n));
    for (std::int64_t i = 0; i < s.n; ++i) v[static_cast<std::size_t>(i)] = s.at(i, k);
    return uniform_ks_stat(std::move(v));
}

double sample_corr(const ContinuousSample& s, int a, int b) {
    double ma = 0.0, mb = 0.0;
    for (std::int64_t i = 0; i < s.n; ++i) {
        ma += s.at(i, a);
        mb += s.at(i, b);
    }
    ma /= static_cast<double>(s.n);
    mb /= static_cast<double>(s.n);
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::int64_t i = 0; i < s.n; ++i) {
        const double ea = s.at(i, a) - ma, eb = s.at(i, b) - mb;
        saa += ea * ea;
        sbb += eb * eb;
        sab += ea * eb;
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("registry lists the expected cases with sane ranges") {
    const auto& reg = case_registry();
    std::set<std::string> ids;
    for (const auto& c : reg) ids.insert(c.id);
    for (const char* want :
         {"uniform.uniform-diagonal", "normal-ind.normal-cor", "uniform.Clayton", "uniform.Frank", "uniform.Gumbel",
          "normal.normal-shift-one.marginal", "mix.Joe.Frank", "DalitzPDG", "uniform.uniform-diagonal-5",
          "normal-ind.normal-cor-5"})
        CHECK(ids.count(want) == 1);

    for (const auto& c : reg) {
        CAPTURE(c.id);
        CHECK(c.dim == c.null_model.dim);
        CHECK(c.lambda_null == 0.0);
        CHECK(c.lambda_lo <= c.lambda_null);
        CHECK(c.lambda_null < c.lambda_default);
        CHECK(c.lambda_default < c.lambda_hi);
        CHECK(static_cast<bool>(c.alt_sampler));
        if (c.has_discrete) {
            CHECK(static_cast<bool>(c.disc_expectation));
            CHECK(static_cast<bool>(c.disc_sampler));
            CHECK(c.grid_x.size() >= 2);
            CHECK(c.grid_y.size() >= 2);
        }
    }

    CHECK(find_case("uniform.uniform-diagonal-5")->dim == 5);
    CHECK(find_case("normal-ind.normal-cor-5")->dim == 5);
    CHECK(find_case("normal.normal-shift-one.marginal")->marginals_equal == false);
    CHECK(find_case("uniform.uniform-diagonal")->marginals_equal == true);
    CHECK(find_case("mix.Joe.Frank")->has_discrete);
    CHECK(find_case("no-such-case") == nullptr);
    const auto* c = find_case("uniform.Clayton");
    REQUIRE(c != nullptr);
    CHECK(c->id == std::string("uniform.Clayton"));
}

TEST_CASE("the alternative collapses to the null at lambda zero") {
    // two-sample check works uniformly across cases, cdf or not
    RngPlan plan{11111};
    int idx = 0;
    for (const auto& c : case_registry()) {
        CAPTURE(c.id);
        Rng ra = plan.stream(static_cast<std::uint64_t>(2 * idx));
        Rng rb = plan.stream(static_cast<std::uint64_t>(2 * idx + 1));
        const auto alt = c.alt_sampler(120, c.lambda_null, ra);
        const auto nul = c.null_model.sample(120, rb);
        REQUIRE(alt.d == c.dim);
        const auto out = ts_permutation_test(alt, nul, "KS", 99, plan.sub(static_cast<std::uint64_t>(idx)), false);
        CHECK(out.pvalue > 0.01);
        ++idx;
    }
}

TEST_CASE("diagonal tilt keeps every marginal exactly uniform") {
    for (const char* id : {"uniform.uniform-diagonal", "uniform.uniform-diagonal-5"}) {
        const auto* c = find_case(id);
        REQUIRE(c != nullptr);
        for (double lambda : {0.5, 1.0}) {
            Rng r(hash64(id) ^ static_cast<std::uint64_t>(lambda * 8));
            const auto s = c->alt_sampler(2000, lambda, r);
            for (int k = 0; k < c->dim; ++k) {
                CAPTURE(id);
                CAPTURE(lambda);
                CAPTURE(k);
                CHECK(marginal_ks(s, k) < 0.04);  // 1% KS critical value is ~0.036
            }
        }
    }
}

TEST_CASE("diagonal tilt strength follows the cosine moment") {
    // E[prod_k cos(pi x_k)] = lambda / 2^d under the tilted density
    const auto* c2 = find_case("uniform.uniform-diagonal");
    const double pi = std::acos(-1.0);
    for (double lambda : {0.0, 0.5, 1.0}) {
        Rng r(42 + static_cast<std::uint64_t>(lambda * 4));
        const auto s = c2->alt_sampler(6000, lambda, r);
        double m = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) m += std::cos(pi * s.at(i, 0)) * std::cos(pi * s.at(i, 1));
        m /= static_cast<double>(s.n);
        CHECK(m == doctest::Approx(lambda / 4.0).scale(1).epsilon(0.03));
    }
}

TEST_CASE("correlation cases hit the requested correlation") {
    const auto* c2 = find_case("normal-ind.normal-cor");
    Rng r(808);
    const auto s = c2->alt_sampler(4000, 0.6, r);
    CHECK(sample_corr(s, 0, 1) == doctest::Approx(0.6).epsilon(0.08));
    double mean = 0.0, ss = 0.0;
    for (std::int64_t i = 0; i < s.n; ++i) {
        mean += s.at(i, 0);
        ss += s.at(i, 0) * s.at(i, 0);
    }
    mean /= static_cast<double>(s.n);
    CHECK(std::abs(mean) < 0.06);
    CHECK(ss / static_cast<double>(s.n) == doctest::Approx(1.0).epsilon(0.08));

    const auto* c5 = find_case("normal-ind.normal-cor-5");
    const auto s5 = c5->alt_sampler(3000, 0.4, r);
    for (int a = 0; a < 5; ++a)
        for (int b = a + 1; b < 5; ++b) {
            CAPTURE(a);
            CAPTURE(b);
            CHECK(sample_corr(s5, a, b) == doctest::Approx(0.4).scale(1).epsilon(0.06));
        }
}

TEST_CASE("copula cases agree with their own joint cdf at the median") {
    // P(U <= 1/2, V <= 1/2) estimated from the sampler vs the model value
    struct Probe {
        const char* id;
        double lambda;
        double want;  // C(0.5, 0.5) for the theta that lambda selects
    };
    // Clayton theta=2: (2^2+2^2-1)^(-1/2); Frank theta=4 and Gumbel theta=1.6
    // computed from the standard formulas.
    const double clayton = 1.0 / std::sqrt(7.0);
    const double frank = -0.25 * std::log(1.0 + std::pow(std::exp(-2.0) - 1.0, 2) / (std::exp(-4.0) - 1.0));
    const double gumbel = std::exp(-std::pow(2.0 * std::pow(std::log(2.0), 1.6), 1.0 / 1.6));
    for (const Probe& p : {Probe{"uniform.Clayton", 2.0, clayton}, Probe{"uniform.Frank", 4.0, frank},
                           Probe{"uniform.Gumbel", 0.6, gumbel}}) {
        CAPTURE(p.id);
        const auto* c = find_case(p.id);
        REQUIRE(c != nullptr);
        Rng r(hash64(p.id));
        const auto s = c->alt_sampler(3000, p.lambda, r);
        double frac = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) frac += s.at(i, 0) <= 0.5 && s.at(i, 1) <= 0.5;
        frac /= static_cast<double>(s.n);
        CHECK(frac == doctest::Approx(p.want).epsilon(0.12));
        CHECK(frac > 0.27);  // visibly above the independent 0.25
        // marginals stay uniform under the copula
        CHECK(marginal_ks(s, 0) < 0.04);
        CHECK(marginal_ks(s, 1) < 0.04);
    }
}

TEST_CASE("the marginal-shift case moves only the first coordinate") {
    const auto* c = find_case("normal.normal-shift-one.marginal");
    Rng r(99);
    const auto s = c->alt_sampler(3000, 1.2, r);
    double m0 = 0.0, m1 = 0.0;
    for (std::int64_t i = 0; i < s.n; ++i) {
        m0 += s.at(i, 0);
        m1 += s.at(i, 1);
    }
    m0 /= static_cast<double>(s.n);
    m1 /= static_cast<double>(s.n);
    CHECK(m0 == doctest::Approx(1.2).epsilon(0.06));
    CHECK(std::abs(m1) < 0.07);
}

TEST_CASE("gridded mixture case is self-consistent") {
    const auto* c = find_case("mix.Joe.Frank");
    REQUIRE(c != nullptr);
    REQUIRE(c->grid_x.size() == 5);
    REQUIRE(c->grid_y.size() == 5);

    const auto e = c->disc_expectation(400.0);
    CHECK(e.n == doctest::Approx(400.0).epsilon(1e-9));
    double tot = 0.0;
    for (double v : e.expected) {
        CHECK(v >= 0.0);
        tot += v;
    }
    CHECK(tot == doctest::Approx(400.0).epsilon(1e-9));
    REQUIRE(e.expected.size() == 25);

    Rng r(313);
    const auto g = c->disc_sampler(400, c->lambda_null, r);
    CHECK(g.gx() == 5);
    CHECK(g.gy() == 5);
    CHECK(g.total() == 400);
    CHECK(g.valsx == c->grid_x);

    // at the null weight the gridded counts match the gridded expectation
    const auto out = discrete_gof_test(
        g, [&](const DiscreteGridSample& rep) { return c->disc_expectation(static_cast<double>(rep.total())); },
        DiscFlavor::P, 199, RngPlan{515});
    CHECK(out.pvalue > 0.01);

    // pushing the weight off 0.5 changes the distribution measurably
    Rng r2(314);
    const auto far = c->disc_sampler(400, 0.45, r2);
    const auto rej = discrete_gof_test(
        far, [&](const DiscreteGridSample& rep) { return c->disc_expectation(static_cast<double>(rep.total())); },
        DiscFlavor::P, 199, RngPlan{516});
    CHECK(rej.pvalue < 0.05);
}

TEST_CASE("resonance-region samples stay inside the support") {
    const auto* c = find_case("DalitzPDG");
    REQUIRE(c != nullptr);
    Rng r(606);
    const auto s = c->alt_sampler(500, 0.5, r);
    for (std::int64_t i = 0; i < s.n; ++i) {
        const double pt[2] = {s.at(i, 0), s.at(i, 1)};
        CHECK(c->null_model.pdf(std::span<const double>(pt, 2)) > 0.0);
    }
}
