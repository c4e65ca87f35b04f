#pragma once

#include "mvtest/model.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// Chi-square machinery is bivariate only.
enum class BinRule { ES, EP };

// Interior bin edges per axis; cell (i,j) of nx*ny covers
// [ex[i-1], ex[i]) x [ey[j-1], ey[j]) with the outermost bins absorbing
// everything beyond the edges.
struct Grid2D {
    std::vector<double> ex, ey;
    int nx = 0, ny = 0;
};

// Equal-size bins over the data range per coordinate.
Grid2D make_grid_es(const ContinuousSample& s, int nx, int ny);
// Equal-probability bins at the model's marginal quantiles k/nx (GOF).
Grid2D make_grid_ep_model(const NullModel& m, int nx, int ny);
// Equal-probability bins at pooled empirical quantiles (two-sample).
Grid2D make_grid_ep_pooled(const ContinuousSample& pooled, int nx, int ny);

int grid_cell(const Grid2D& g, double x, double y);

// Binned counts plus expected values and the merge state. group[c] maps
// original cell c to its merged bin; merged bins are numbered 0..n_groups-1
// in row-major anchor order.
struct BinTable {
    int nx = 0, ny = 0;
    std::vector<double> expected;        // per original cell; empty for two-sample
    std::vector<std::int64_t> observed;  // sample 1
    std::vector<std::int64_t> observed2; // sample 2; empty for GOF
    std::vector<int> group;
    int n_groups = 0;

    bool twosample() const { return !observed2.empty(); }
    std::vector<double> merged_expected() const;
    std::vector<std::int64_t> merged_observed() const;
    std::vector<std::int64_t> merged_observed2() const;
};

BinTable bin_gof(const ContinuousSample& s, const NullModel& model, const Grid2D& g);
BinTable bin_twosample(const ContinuousSample& s1, const ContinuousSample& s2, const Grid2D& g);

// Greedy low-count merge, threshold 5 by default. Deficiency is measured
// on expected counts for GOF tables and on pooled observed counts for
// two-sample tables. Scanning merged bins in row-major anchor order, a
// deficient bin merges with the next bin when that bin's anchor lies in
// the same row, otherwise with the previous bin; repeat to fixpoint.
void merge_low_bins(BinTable& t, double threshold = 5.0);

// Pearson statistic over merged bins: sum (O-E)^2/E.
double chisq_gof_stat(const BinTable& t);
// Standard two-sample form: sum_k sum_bins (O_k - N_k Z/N)^2 / (N_k Z/N).
double chisq_ts_stat(const BinTable& t);

// Asymptotic chi-square test, df = bins - 1 - #estimated (GOF, Fisher) or
// bins - 1 (two-sample). Continuous data only; discrete data goes through
// the simulation-calibrated Pearson in the discrete module.
TestOutcome gof_chisq(const ContinuousSample& s, const NullModel& model, int nx, int ny, BinRule rule);
TestOutcome twosample_chisq(const ContinuousSample& s1, const ContinuousSample& s2, int nx, int ny, BinRule rule);

std::string chisq_method_tag(BinRule rule);

}  // namespace mvtest
