#pragma once

#include <optional>

#include "mvtest/chisquare.hpp"
#include "mvtest/density_gof.hpp"
#include "mvtest/discrete_gof.hpp"
#include "mvtest/edf_gof.hpp"
#include "mvtest/rosenblatt.hpp"
#include "mvtest/twosample.hpp"

namespace mvtest {

enum class ProblemKind { GofContinuous, GofDiscrete, TsContinuous, TsDiscrete };

std::string to_string(ProblemKind k);

// Static description of one method tag: where it applies, what the null
// model must provide, how its p-value is calibrated.
struct MethodInfo {
    std::string tag;
    ProblemKind kind;
    int min_dim = 1, max_dim = 0;  // max_dim 0 = unbounded
    bool needs_cdf = false, needs_pdf = false, needs_sampler = false;
    std::string calibration;  // bootstrap / permutation / simulation / asymptotic / exact
    std::string summary;
};

const std::vector<MethodInfo>& method_registry();

// nullptr when the tag is unknown for this problem kind. Hybrid tags are
// not in the registry; resolve them with parse_hybrid_tag first.
const MethodInfo* find_method(const std::string& tag, ProblemKind kind);

// <two-sample tag>T1 / <two-sample tag>T5, e.g. MMDT5: goodness-of-fit via
// a simulated second sample of ratio * n points and the named two-sample
// permutation statistic.
struct HybridTag {
    std::string base;
    int ratio = 1;
};
std::optional<HybridTag> parse_hybrid_tag(const std::string& tag);

struct GofOptions {
    std::int64_t B = 500;
    int grid_nx = 5, grid_ny = 5;
    BBOptions bb;
    std::vector<double> rk_radii;  // empty = default grid
    double poisson_rate = 0.0;     // > 0: replicate sizes Poisson(rate)
};

// Dispatch a list of continuous-GOF tags. Bootstrap-calibrated tags (qKS
// qK qCvM qAD BB BR FF RK) share one parametric-bootstrap ensemble; ES/EP
// run the asymptotic chi-square; hybrid tags run their two-sample test on
// a fresh simulated sample. Results come back in request order.
std::vector<TestOutcome> run_gof(const ContinuousSample& s, const NullModel& model,
                                 const std::vector<std::string>& tags, const GofOptions& opt, const RngPlan& plan);

TestOutcome run_gof_single(const ContinuousSample& s, const NullModel& model, const std::string& tag,
                           const GofOptions& opt, const RngPlan& plan);

// Min-p combination of bootstrap-calibrated GOF members on one shared
// ensemble.
TestOutcome combined_gof(const ContinuousSample& s, const NullModel& model, const std::vector<std::string>& tags,
                         const GofOptions& opt, const RngPlan& plan);

// GOF by two-sample: draw ratio*n points from the (re-fitted) null and run
// the base tag as a permutation test. Tag reported as e.g. "MMDT5".
TestOutcome hybrid_gof(const ContinuousSample& s, const NullModel& model, int ratio, const std::string& base_tag,
                       std::int64_t B, const RngPlan& plan);

std::vector<TestOutcome> run_gof_discrete(const DiscreteGridSample& s, const ExpectationFn& expectation,
                                          const std::vector<std::string>& tags, std::int64_t B, const RngPlan& plan);

struct TsOptions {
    std::int64_t B = 500;
    int grid_nx = 5, grid_ny = 5;
    bool exhaustive = false;
};

std::vector<TestOutcome> run_twosample(const ContinuousSample& s1, const ContinuousSample& s2,
                                       const std::vector<std::string>& tags, const TsOptions& opt,
                                       const RngPlan& plan);

std::vector<TestOutcome> run_twosample_discrete(const DiscreteGridSample& a, const DiscreteGridSample& b,
                                                const std::vector<std::string>& tags, std::int64_t B,
                                                const RngPlan& plan);

}  // namespace mvtest
