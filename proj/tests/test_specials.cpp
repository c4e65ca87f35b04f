#include <cmath>

#include "doctest.h"
#include "mvtest/specials.hpp"

using namespace mvtest;

TEST_CASE("chi-square upper tail") {
    CHECK(chisq_sf(0.0, 5) == doctest::Approx(1.0));
    // df=2 is exp(-x/2) exactly
    CHECK(chisq_sf(2.0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(chisq_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chisq_sf(36.41502850180731, 24) == doctest::Approx(0.05).epsilon(1e-9));
    CHECK(chisq_sf(1e4, 3) < 1e-300);
}

TEST_CASE("normal cdf and pdf") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
    CHECK(normal_cdf(-1.3) == doctest::Approx(1.0 - normal_cdf(1.3)).epsilon(1e-12));
    CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(normal_pdf(2.0) == doctest::Approx(std::exp(-2.0) * 0.3989422804014327).epsilon(1e-12));
}

TEST_CASE("binomial upper tail") {
    CHECK(binom_sf(0, 10, 0.3) == doctest::Approx(1.0));
    // P(X >= 2), X ~ Bin(3, 1/2): (3 + 1)/8
    CHECK(binom_sf(2, 3, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(binom_sf(3, 3, 0.5) == doctest::Approx(0.125).epsilon(1e-12));
    // complement of the lower tail at an asymmetric p
    const double p01 = 1.0 - (std::pow(0.8, 4) + 4 * 0.2 * std::pow(0.8, 3));
    CHECK(binom_sf(2, 4, 0.2) == doctest::Approx(p01).epsilon(1e-12));
}
