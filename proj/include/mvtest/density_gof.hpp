#pragma once

#include "mvtest/inference.hpp"
#include "mvtest/model.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

struct BBOptions {
    int mc_points = 1024;  // quasi-uniform points per ball integral
};

// Uniformizing transform: R_j is the nearest-neighbor distance of point j
// and U_j = exp(-n * integral of the null density over the radius-R_j ball
// around point j). Under the null the U_j are approximately U(0,1).
// Duplicate rows give R_j = 0, hence U_j = 1, and raise the flag.
struct BBTransform {
    std::vector<double> radii, u;
    bool had_duplicates = false;
};

// Ball integrals are evaluated on a quasi-uniform point set; each ball's
// substream derives from (seed, point index) only, so the transform is
// deterministic and independent of evaluation order.
BBTransform bb_transform(const ContinuousSample& s, const NullModel& model, const BBOptions& opts,
                         std::uint64_t seed);

// One-sample Kolmogorov-Smirnov distance of values to U(0,1).
double uniform_ks_stat(std::vector<double> u);

TestOutcome bb_test(const ContinuousSample& s, const NullModel& model, const BBOptions& opts, std::int64_t B,
                    const RngPlan& plan, double poisson_rate = 0.0);

// Rule-of-thumb bandwidth per coordinate: sd_k * (4/((d+2) n))^(1/(d+4)).
std::vector<double> silverman_bandwidths(const ContinuousSample& s);

// Mean squared distance between a Gaussian-product-kernel density estimate
// and the null density, both evaluated at the sample points.
double br_stat(const ContinuousSample& s, const NullModel& model);

TestOutcome br_test(const ContinuousSample& s, const NullModel& model, std::int64_t B, const RngPlan& plan,
                    double poisson_rate = 0.0);

}  // namespace mvtest
