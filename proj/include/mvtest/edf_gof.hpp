#pragma once

#include "mvtest/inference.hpp"
#include "mvtest/model.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// Model cdf F and empirical cdf Fhat evaluated at every data point, where
// Fhat uses componentwise dominance with the <= convention (so every point
// dominates itself and Fhat >= 1/n).
struct EdfPairs {
    std::vector<double> f, fhat;
};

EdfPairs edf_pairs(const ContinuousSample& s, const NullModel& model);

// Quick EDF functionals over the pairs. Sums are over data points, not
// averaged; qad clips F to [1e-10, 1 - 1e-10] before weighting.
double qks_stat(const EdfPairs& p);
double qk_stat(const EdfPairs& p);
double qcvm_stat(const EdfPairs& p);
double qad_stat(const EdfPairs& p);

enum class EdfFlavor { KS, K, CvM, AD };

double edf_stat(EdfFlavor f, const EdfPairs& p);

// Parametric-bootstrap test for one flavor. Method tags qKS/qK/qCvM/qAD.
TestOutcome edf_gof_test(const ContinuousSample& s, const NullModel& model, EdfFlavor flavor, std::int64_t B,
                         const RngPlan& plan, double poisson_rate = 0.0);

}  // namespace mvtest
