#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mvtest/sample.hpp"

// Plain single-threaded implementations of everything the OpenMP kernels
// and shared-context statistics compute, written independently as nested
// loops. Tests compare the fast paths against these; the benchmark target
// measures the gap.
namespace mvtest::ref {

std::vector<double> pairwise_distances(const ContinuousSample& s);  // condensed, pair (i<j)
std::vector<std::int64_t> dominance_counts(const ContinuousSample& s);
std::vector<std::int32_t> knn_indices(const ContinuousSample& s, int k);
std::vector<std::pair<std::int32_t, std::int32_t>> minimum_spanning_tree(const ContinuousSample& s);

// Exhaustive minimum spanning tree by Pruefer-sequence enumeration of all
// N^(N-2) labeled trees; feasible for tiny N only.
std::vector<std::pair<std::int32_t, std::int32_t>> minimum_spanning_tree_bruteforce(const ContinuousSample& s);

// Quick EDF goodness-of-fit statistics from a cdf callback.
using CdfFn = std::function<double(double, double)>;  // bivariate convenience
double qks(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf);
double qk(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf);
double qcvm(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf);
double qad(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf);

// Two-sample statistics recomputed from the raw samples.
double ts_ks(const ContinuousSample& x, const ContinuousSample& y);
double ts_k(const ContinuousSample& x, const ContinuousSample& y);
double ts_cvm(const ContinuousSample& x, const ContinuousSample& y);
double ts_ad(const ContinuousSample& x, const ContinuousSample& y);
double ts_nn_fraction(const ContinuousSample& x, const ContinuousSample& y, int k);
double ts_az(const ContinuousSample& x, const ContinuousSample& y);
double ts_bf(const ContinuousSample& x, const ContinuousSample& y);
double ts_bf_paper(const ContinuousSample& x, const ContinuousSample& y);
double ts_bg(const ContinuousSample& x, const ContinuousSample& y);
std::vector<double> ts_mmd(const ContinuousSample& x, const ContinuousSample& y);  // 10 bandwidths
double ts_fr(const ContinuousSample& x, const ContinuousSample& y);
std::int64_t ts_nn0(const ContinuousSample& x, const ContinuousSample& y);

double kde_distance(const ContinuousSample& s, const std::function<double(std::span<const double>)>& pdf);

}  // namespace mvtest::ref
