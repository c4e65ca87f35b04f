#pragma once

#include <functional>

#include "mvtest/inference.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// Cumulative observed/expected fractions per cell: sums over i' <= i,
// j' <= j, both normalized by the sample total.
struct GridCdfs {
    std::vector<double> f, fhat;  // x-fastest, same layout as counts
};

GridCdfs grid_cdfs(const DiscreteGridSample& s, const GridExpectation& e);

enum class DiscFlavor { KS, K, CvM, AD, P, TV, KL, H };

const char* disc_tag(DiscFlavor f);

double disc_stat(DiscFlavor f, const DiscreteGridSample& s, const GridExpectation& e);

// Expectation provider, re-evaluated on every simulated replicate so
// composite nulls stay composite; a fixed null ignores its argument.
using ExpectationFn = std::function<GridExpectation(const DiscreteGridSample&)>;

GridExpectation fixed_expectation(const GridExpectation& e, const DiscreteGridSample&);

// Simulation-calibrated test: replicates are multinomial draws of the
// observed total from expected/n.
TestOutcome discrete_gof_test(const DiscreteGridSample& s, const ExpectationFn& expectation, DiscFlavor flavor,
                              std::int64_t B, const RngPlan& plan);

// One simulation pass evaluating every flavor on shared replicates.
std::vector<TestOutcome> discrete_gof_battery(const DiscreteGridSample& s, const ExpectationFn& expectation,
                                              const std::vector<DiscFlavor>& flavors, std::int64_t B,
                                              const RngPlan& plan);

// Multinomial(n, p) by n categorical draws; p need not be normalized.
std::vector<std::int64_t> multinomial_draw(std::int64_t n, const std::vector<double>& weights, Rng& rng);

}  // namespace mvtest
