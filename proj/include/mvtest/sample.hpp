#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mvtest {

// Row-major n x d matrix of observations. Row order carries no meaning;
// every statistic must be invariant under row permutation.
struct ContinuousSample {
    std::vector<double> data;  // n*d values, row-major
    std::int64_t n = 0;
    int d = 0;

    ContinuousSample() = default;
    ContinuousSample(std::int64_t n_, int d_) : data(static_cast<std::size_t>(n_) * d_), n(n_), d(d_) {}

    double& at(std::int64_t i, int j) { return data[static_cast<std::size_t>(i) * d + j]; }
    double at(std::int64_t i, int j) const { return data[static_cast<std::size_t>(i) * d + j]; }
    std::span<const double> row(std::int64_t i) const {
        return {data.data() + static_cast<std::size_t>(i) * d, static_cast<std::size_t>(d)};
    }

    // Enforces n >= 2, d >= 1 and finiteness of every entry.
    void validate() const;
};

// Full rectangular grid of counts over strictly increasing coordinate
// values; counts laid out x-fastest: cell (i,j) lives at counts[i + gx*j].
struct DiscreteGridSample {
    std::vector<double> valsx, valsy;
    std::vector<std::int64_t> counts;

    int gx() const { return static_cast<int>(valsx.size()); }
    int gy() const { return static_cast<int>(valsy.size()); }
    std::int64_t cell(int i, int j) const { return counts[static_cast<std::size_t>(i) + static_cast<std::size_t>(gx()) * j]; }
    std::int64_t& cell(int i, int j) { return counts[static_cast<std::size_t>(i) + static_cast<std::size_t>(gx()) * j]; }
    std::int64_t total() const;

    // Strictly increasing values, counts size gx*gy, nonnegative, total >= 1.
    void validate() const;
};

// Expected cell counts under a discrete null, same layout as the sample grid.
struct GridExpectation {
    std::vector<double> expected;  // x-fastest, sums to n
    double n = 0.0;
};

enum class PValueKind { asymptotic, permutation, bootstrap };

std::string to_string(PValueKind k);

// Result of one test run: everything needed to reproduce it.
struct TestOutcome {
    std::string method;
    double statistic = 0.0;
    double pvalue = 1.0;
    PValueKind kind = PValueKind::asymptotic;
    std::int64_t replicates = 0;
    std::uint64_t seed = 0;
};

// Membership of pooled rows: labels[i] = 0 for the first sample, 1 for the
// second; exactly n zeros followed-or-mixed with m ones.
struct LabelSplit {
    std::vector<std::uint8_t> labels;
    std::int64_t n = 0;  // size of sample 1 (label 0)
    std::int64_t m = 0;  // size of sample 2 (label 1)
};

// Stack two samples of equal dimension; rows of `a` first, then `b`.
// The returned split is the identity labeling.
std::pair<ContinuousSample, LabelSplit> pooled(const ContinuousSample& a, const ContinuousSample& b);

}  // namespace mvtest
