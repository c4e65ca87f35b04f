#pragma once

#include <functional>
#include <span>

#include "mvtest/model.hpp"
#include "mvtest/rng.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// Every simulated p-value in the library uses the add-one convention
// p = (1 + #{T_b >= T_obs}) / (1 + B): valid for any B and never zero.
double add_one_pvalue(std::int64_t count_ge, std::int64_t B);

// Observed statistics plus a B x n_stats matrix of null replicates.
// Several tests (aggregated MMD, combined min-p) need the whole matrix,
// not just counts, so the engines hand it back verbatim.
struct EnsembleResult {
    std::vector<double> observed;
    std::vector<double> replicates;  // row b holds replicate b
    std::int64_t B = 0;
    int n_stats = 0;

    double rep(std::int64_t b, int k) const { return replicates[static_cast<std::size_t>(b) * n_stats + k]; }
    // Upper-tail add-one p-value for one statistic.
    double pvalue(int k) const;
};

using GofEval = std::function<void(const ContinuousSample&, const NullModel&, std::span<double>)>;
using SplitEval = std::function<void(const LabelSplit&, std::span<double>)>;

// Parametric bootstrap: replicate b redraws a sample from the (re-fitted
// per replicate when an estimator is present) null model using stream(b)
// and evaluates all statistics on it. A failing estimator is retried once
// on a fresh draw, then the error propagates. poisson_rate > 0 switches
// replicate sizes to Poisson(rate) conditioned on >= 2.
EnsembleResult bootstrap_ensemble(const ContinuousSample& data, const NullModel& model, int n_stats,
                                  const GofEval& eval, std::int64_t B, const RngPlan& plan,
                                  double poisson_rate = 0.0);

// Label permutations of a pooled sample of N rows, n1 of which carry label
// 0. exhaustive = true enumerates all C(N, n1) splits instead of sampling;
// the identity split is excluded from the replicate set, which makes the
// add-one p-value equal the full-enumeration p-value exactly.
EnsembleResult permutation_ensemble(std::int64_t N, std::int64_t n1, int n_stats, const SplitEval& eval,
                                    std::int64_t B, const RngPlan& plan, bool exhaustive = false);

// Number of splits an exhaustive enumeration would evaluate, or 0 when it
// exceeds `limit`.
std::int64_t exhaustive_split_count(std::int64_t N, std::int64_t n1, std::int64_t limit = 1 << 20);

// Min-p combination over the statistics of an ensemble: every member's
// p-value (observed and per replicate) is computed against the same
// replicate ensemble, and the combined statistic min_k p_k is calibrated
// by the lower tail of its own replicate distribution.
TestOutcome combined_from_ensemble(const EnsembleResult& ens, const std::vector<std::string>& members,
                                   PValueKind kind, std::uint64_t seed);

// Aggregated-maximum combination for bandwidth families: each column is
// standardized by the mean/sd of its replicate ensemble, the statistic is
// the max standardized column, calibrated by the same ensemble.
TestOutcome max_standardized_from_ensemble(const EnsembleResult& ens, const std::string& method, PValueKind kind,
                                           std::uint64_t seed);

// Random sample size for the Poisson-n protocol: Poisson(rate) redrawn
// until >= 2.
std::int64_t poisson_n(double rate, Rng& rng);

}  // namespace mvtest
