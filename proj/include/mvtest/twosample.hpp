#pragma once

#include <optional>

#include "mvtest/chisquare.hpp"
#include "mvtest/inference.hpp"
#include "mvtest/kernels.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// Everything reusable across permutations of one pooled sample: pairwise
// distances, the dominance matrix, neighbor lists, the spanning tree and
// per-pair kernel values. Built once, read by every split evaluation.
struct TsContext {
    ContinuousSample pool;
    std::int64_t n = 0, m = 0, N = 0;
    DistanceMatrix dist;

    std::vector<std::int64_t> dom_total;  // row sums of the dominance matrix
    std::vector<std::uint8_t> dom;        // dom[i*N+j] = row j <= row i
    std::vector<std::int32_t> nn5;        // 5 nearest neighbors per row
    std::vector<std::pair<std::int32_t, std::int32_t>> mst;
    double mst_pairs_sharing_node = 0.0;  // C = sum_v deg(v)(deg(v)-1)/2

    std::vector<double> logd, sqrtd;  // guarded log / sqrt per pair
    std::vector<double> bandwidths;   // 10 MMD bandwidths
    std::vector<double> kern;         // pair-major kernel values, 10 per pair
};

// Scalar two-sample statistics; MMD is handled as a bandwidth family.
enum class TsFlavor { KS, K, CvM, AD, NN1, NN5, AZ, BF, BFpaper, BG, FR, NN0 };

const char* ts_tag(TsFlavor f);
std::optional<TsFlavor> ts_flavor_from_tag(const std::string& tag);

TsContext make_ts_context(const ContinuousSample& s1, const ContinuousSample& s2, bool need_edf, bool need_nn,
                          bool need_mst, bool need_logd, bool need_sqrtd, bool need_mmd);

// Pooled-point EDF distances between the two empirical cdfs, all four
// functionals in one pass (AD weights by the pooled ecdf H, skipping
// cells with H at 0 or 1).
struct TsEdfStats {
    double ks, k, cvm, ad;
};
TsEdfStats ts_edf_stats(const TsContext& ctx, const LabelSplit& split);

double ts_stat(const TsContext& ctx, const LabelSplit& split, TsFlavor f);

// Unbiased Gaussian-kernel MMD^2 for every bandwidth in ctx.bandwidths.
std::vector<double> mmd_stats(const TsContext& ctx, const LabelSplit& split);

// Median pooled distance scaled by 2^k, k = -4..5.
std::vector<double> mmd_bandwidths(const DistanceMatrix& dist);

// Friedman-Rafsky: standardized cross-edge deficit (E[R] - R)/sd(R) under
// the hypergeometric label null on the fixed tree; large values indicate
// separation.
double fr_standardized(const TsContext& ctx, const LabelSplit& split);

// Count of label-0 points whose nearest neighbor is label 0.
std::int64_t nn0_count(const TsContext& ctx, const LabelSplit& split);

// Permutation-calibrated test battery sharing one split ensemble across
// all requested tags. Permutation tags: KS K CvM AD NN1 NN5 AZ BF BF-paper
// BG MMD. Direct tags resolved without the ensemble: FR (asymptotic
// normal), NN0 (exact binomial), ES / EP (asymptotic chi-square on the
// pooled-grid bins). Unknown tags raise ValidationError.
std::vector<TestOutcome> ts_battery(const ContinuousSample& s1, const ContinuousSample& s2,
                                    const std::vector<std::string>& tags, std::int64_t B, const RngPlan& plan,
                                    bool exhaustive = false, int grid_nx = 5, int grid_ny = 5);

TestOutcome ts_test(const ContinuousSample& s1, const ContinuousSample& s2, const std::string& tag, std::int64_t B,
                    const RngPlan& plan, int grid_nx = 5, int grid_ny = 5);

// Permutation p-value for any flavor including FR and NN0 (statistics under
// label permutation); used by the exhaustive-enumeration oracle.
TestOutcome ts_permutation_test(const ContinuousSample& s1, const ContinuousSample& s2, const std::string& tag,
                                std::int64_t B, const RngPlan& plan, bool exhaustive);

// Min-p combination over scalar permutation tags on a shared ensemble.
TestOutcome combined_twosample(const ContinuousSample& s1, const ContinuousSample& s2,
                               const std::vector<std::string>& tags, std::int64_t B, const RngPlan& plan);

TestOutcome nn_binomial_test(const ContinuousSample& s1, const ContinuousSample& s2);
TestOutcome fr_test(const ContinuousSample& s1, const ContinuousSample& s2);

// --------------------------------------------------------------------------
// discrete two-sample on a shared grid

enum class DiscTsFlavor { KS, K, CvM, AD, NN, AZ, BF, Chisq };

const char* disc_ts_tag(DiscTsFlavor f);
std::optional<DiscTsFlavor> disc_ts_flavor_from_tag(const std::string& tag);

// Multivariate hypergeometric reallocation of pooled cell counts: the
// permutation null for gridded data.
std::vector<std::int64_t> hypergeometric_split(const std::vector<std::int64_t>& pooled_counts, std::int64_t n1,
                                               Rng& rng);

std::vector<TestOutcome> discrete_ts_battery(const DiscreteGridSample& a, const DiscreteGridSample& b,
                                             const std::vector<DiscTsFlavor>& flavors, std::int64_t B,
                                             const RngPlan& plan);

TestOutcome discrete_twosample(const DiscreteGridSample& a, const DiscreteGridSample& b, DiscTsFlavor flavor,
                               std::int64_t B, const RngPlan& plan);

}  // namespace mvtest
