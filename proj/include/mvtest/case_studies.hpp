#pragma once

#include <functional>

#include "mvtest/model.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// A registered null/alternative pair. lambda parameterizes the departure
// from the null; at lambda_null the alternative sampler draws from the
// null distribution exactly. Cases with a gridded representation also
// carry a discretized sampler and expected-count function.
struct CaseStudy {
    std::string id;
    int dim = 2;
    bool marginals_equal = true;

    NullModel null_model;
    std::function<ContinuousSample(std::int64_t, double, Rng&)> alt_sampler;
    double lambda_null = 0.0, lambda_lo = 0.0, lambda_hi = 1.0;
    // Hand-tuned moderate difficulty for uncalibrated runs.
    double lambda_default = 0.5;

    bool has_discrete = false;
    std::vector<double> grid_x, grid_y;
    std::function<GridExpectation(double)> disc_expectation;  // n -> expected counts
    std::function<DiscreteGridSample(std::int64_t, double, Rng&)> disc_sampler;
};

const std::vector<CaseStudy>& case_registry();
const CaseStudy* find_case(const std::string& id);

}  // namespace mvtest
