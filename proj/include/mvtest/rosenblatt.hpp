#pragma once

#include "mvtest/inference.hpp"
#include "mvtest/model.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// Bivariate Rosenblatt transform: u1 = F(x1, +inf) and
// u2 = d/dx1 F(x1, x2) / d/dx1 F(x1, +inf), the conditional cdf of x2
// given x1, with the partial derivatives taken by central differences
// (step max(1e-5, 1e-5 |x1|)). Output clipped to [0,1]; a nonpositive
// denominator is a NumericError.
ContinuousSample rosenblatt_2d(const ContinuousSample& s, const NullModel& model);

// Transformed-sample KS against the independence copula: the quick-KS
// functional composed with the Rosenblatt transform.
double ff_stat(const ContinuousSample& s, const NullModel& model);
TestOutcome ff_test(const ContinuousSample& s, const NullModel& model, std::int64_t B, const RngPlan& plan,
                    double poisson_rate = 0.0);

// Default radius grid: 20 equispaced radii in (0, 0.25].
std::vector<double> default_rk_radii();

// Ripley K estimate on unit-square points: the scaling makes
// E[khat(r)] = pi r^2 under uniformity (no edge correction).
std::vector<double> ripley_khat(const ContinuousSample& unit_pts, const std::vector<double>& radii);

// Mean over the radius grid of (khat(r) - pi r^2)^2 after transforming to
// the unit square.
double ripley_k_stat(const ContinuousSample& s, const NullModel& model, const std::vector<double>& radii);
TestOutcome ripley_k_test(const ContinuousSample& s, const NullModel& model, const std::vector<double>& radii,
                          std::int64_t B, const RngPlan& plan, double poisson_rate = 0.0);

}  // namespace mvtest
