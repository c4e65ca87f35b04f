#pragma once

namespace mvtest {

// Thin wrappers over Boost.Math so call sites stay terse and the
// dependency stays in one translation unit.

// P(Chi2_df >= x), the chi-square upper tail.
double chisq_sf(double x, double df);

double normal_cdf(double z);
double normal_pdf(double z);

// P(Bin(n, p) >= k), the binomial upper tail.
double binom_sf(long long k, long long n, double p);

}  // namespace mvtest
