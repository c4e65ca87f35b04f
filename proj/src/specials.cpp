#include "mvtest/specials.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/normal.hpp>

namespace mvtest {

double chisq_sf(double x, double df) {
    if (x <= 0.0) return 1.0;
    boost::math::chi_squared dist(df);
    return boost::math::cdf(boost::math::complement(dist, x));
}

double normal_cdf(double z) {
    static const boost::math::normal dist;
    return boost::math::cdf(dist, z);
}

double normal_pdf(double z) {
    static const boost::math::normal dist;
    return boost::math::pdf(dist, z);
}

double binom_sf(long long k, long long n, double p) {
    if (k <= 0) return 1.0;
    if (k > n) return 0.0;
    boost::math::binomial dist(static_cast<double>(n), p);
    // P(X >= k) = 1 - P(X <= k-1)
    return boost::math::cdf(boost::math::complement(dist, static_cast<double>(k - 1)));
}

}  // namespace mvtest
