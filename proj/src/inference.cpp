#include "mvtest/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "mvtest/errors.hpp"

namespace mvtest {

double add_one_pvalue(std::int64_t count_ge, std::int64_t B) {
    return static_cast<double>(1 + count_ge) / static_cast<double>(1 + B);
}

double EnsembleResult::pvalue(int k) const {
    std::int64_t c = 0;
    for (std::int64_t b = 0; b < B; ++b) c += rep(b, k) >= observed[static_cast<std::size_t>(k)];
    return add_one_pvalue(c, B);
}

EnsembleResult bootstrap_ensemble(const ContinuousSample& data, const NullModel& model, int n_stats,
                                  const GofEval& eval, std::int64_t B, const RngPlan& plan, double poisson_rate) {
    if (B < 1) throw ValidationError("bootstrap_ensemble: B must be positive");
    model.require_sampler("bootstrap_ensemble");
    model.require_dim(data.d, "bootstrap_ensemble");

    EnsembleResult out;
    out.B = B;
    out.n_stats = n_stats;
    out.observed.resize(static_cast<std::size_t>(n_stats));
    out.replicates.resize(static_cast<std::size_t>(B) * n_stats);

    const NullModel fitted = model.fitted(data);
    eval(data, fitted, out.observed);

    // Stream layout: stream(b) drives replicate b; streams B+b serve the
    // single allowed retry after an estimator failure.
#pragma omp parallel for schedule(dynamic, 1) if (omp_get_level() == 0 && B > 1)
    for (std::int64_t b = 0; b < B; ++b) {
        std::span<double> row(out.replicates.data() + static_cast<std::size_t>(b) * n_stats,
                              static_cast<std::size_t>(n_stats));
        for (int attempt = 0;; ++attempt) {
            Rng rng = plan.stream(static_cast<std::uint64_t>(attempt == 0 ? b : B + b));
            const std::int64_t nb = poisson_rate > 0.0 ? poisson_n(poisson_rate, rng) : data.n;
            ContinuousSample rep = fitted.sampler(nb, rng);
            try {
                const NullModel refit = fitted.fitted(rep);
                eval(rep, refit, row);
                break;
            } catch (const NumericError&) {
                if (attempt >= 1) throw;
            }
        }
    }
    return out;
}

namespace {

LabelSplit split_from_mask(const std::vector<std::uint8_t>& mask, std::int64_t n1) {
    LabelSplit s;
    s.labels.resize(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) s.labels[i] = mask[i] ? 0 : 1;
    s.n = n1;
    s.m = static_cast<std::int64_t>(mask.size()) - n1;
    return s;
}

}  // namespace

std::int64_t exhaustive_split_count(std::int64_t N, std::int64_t n1, std::int64_t limit) {
    double c = 1.0;
    for (std::int64_t i = 0; i < n1; ++i) {
        c *= static_cast<double>(N - i) / static_cast<double>(i + 1);
        if (c > static_cast<double>(limit) * 2.0) return 0;
    }
    const std::int64_t count = static_cast<std::int64_t>(std::llround(c));
    return count <= limit ? count : 0;
}

EnsembleResult permutation_ensemble(std::int64_t N, std::int64_t n1, int n_stats, const SplitEval& eval,
                                    std::int64_t B, const RngPlan& plan, bool exhaustive) {
    if (n1 < 1 || n1 >= N) throw ValidationError("permutation_ensemble: need 1 <= n1 < N");

    EnsembleResult out;
    out.n_stats = n_stats;
    out.observed.resize(static_cast<std::size_t>(n_stats));

    // Identity labeling: first n1 rows are sample 1.
    std::vector<std::uint8_t> identity(static_cast<std::size_t>(N), 0);
    std::fill(identity.begin(), identity.begin() + n1, std::uint8_t{1});
    eval(split_from_mask(identity, n1), out.observed);

    if (exhaustive) {
        const std::int64_t total = exhaustive_split_count(N, n1);
        if (total == 0) throw ValidationError("permutation_ensemble: exhaustive enumeration too large");
        out.B = total - 1;  // identity handled by the add-one convention
        out.replicates.resize(static_cast<std::size_t>(out.B) * n_stats);
        // Enumerate n1-subsets of {0..N-1} in lexicographic order.
        std::vector<std::int64_t> comb(static_cast<std::size_t>(n1));
        for (std::int64_t i = 0; i < n1; ++i) comb[static_cast<std::size_t>(i)] = i;
        std::int64_t row = 0;
        for (;;) {
            std::vector<std::uint8_t> mask(static_cast<std::size_t>(N), 0);
            for (auto idx : comb) mask[static_cast<std::size_t>(idx)] = 1;
            if (mask != identity) {
                eval(split_from_mask(mask, n1),
                     std::span<double>(out.replicates.data() + static_cast<std::size_t>(row) * n_stats,
                                       static_cast<std::size_t>(n_stats)));
                ++row;
            }
            // advance combination
            std::int64_t k = n1 - 1;
            while (k >= 0 && comb[static_cast<std::size_t>(k)] == N - n1 + k) --k;
            if (k < 0) break;
            ++comb[static_cast<std::size_t>(k)];
            for (std::int64_t t = k + 1; t < n1; ++t) comb[static_cast<std::size_t>(t)] = comb[static_cast<std::size_t>(t - 1)] + 1;
        }
        return out;
    }

    if (B < 1) throw ValidationError("permutation_ensemble: B must be positive");
    out.B = B;
    out.replicates.resize(static_cast<std::size_t>(B) * n_stats);
#pragma omp parallel for schedule(dynamic, 4) if (omp_get_level() == 0 && B > 1)
    for (std::int64_t b = 0; b < B; ++b) {
        Rng rng = plan.stream(static_cast<std::uint64_t>(b));
        const auto mask = sample_mask(static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(n1), rng);
        eval(split_from_mask(mask, n1), std::span<double>(out.replicates.data() + static_cast<std::size_t>(b) * n_stats,
                                                          static_cast<std::size_t>(n_stats)));
    }
    return out;
}

TestOutcome combined_from_ensemble(const EnsembleResult& ens, const std::vector<std::string>& members,
                                   PValueKind kind, std::uint64_t seed) {
    if (ens.n_stats < 2) throw ValidationError("combined test needs at least 2 members");
    const std::int64_t B = ens.B;
    const int K = ens.n_stats;

    // p-value of a statistic vector against the replicate ensemble.
    auto min_p = [&](const double* stats) {
        double best = 1.0;
        for (int k = 0; k < K; ++k) {
            std::int64_t c = 0;
            for (std::int64_t b = 0; b < B; ++b) c += ens.rep(b, k) >= stats[k];
            best = std::min(best, add_one_pvalue(c, B));
        }
        return best;
    };

    const double t_obs = min_p(ens.observed.data());
    std::int64_t count_le = 0;
    for (std::int64_t b = 0; b < B; ++b)
        count_le += min_p(ens.replicates.data() + static_cast<std::size_t>(b) * K) <= t_obs;

    TestOutcome out;
    out.method = "combined(";
    for (std::size_t i = 0; i < members.size(); ++i) out.method += (i ? "," : "") + members[i];
    out.method += ")";
    out.statistic = t_obs;
    out.pvalue = add_one_pvalue(count_le, B);
    out.kind = kind;
    out.replicates = B;
    out.seed = seed;
    return out;
}

TestOutcome max_standardized_from_ensemble(const EnsembleResult& ens, const std::string& method, PValueKind kind,
                                           std::uint64_t seed) {
    const std::int64_t B = ens.B;
    const int K = ens.n_stats;
    std::vector<double> mean(static_cast<std::size_t>(K), 0.0), sd(static_cast<std::size_t>(K), 0.0);
    for (int k = 0; k < K; ++k) {
        double s = 0.0;
        for (std::int64_t b = 0; b < B; ++b) s += ens.rep(b, k);
        mean[static_cast<std::size_t>(k)] = s / static_cast<double>(B);
        double ss = 0.0;
        for (std::int64_t b = 0; b < B; ++b) {
            const double e = ens.rep(b, k) - mean[static_cast<std::size_t>(k)];
            ss += e * e;
        }
        sd[static_cast<std::size_t>(k)] = std::sqrt(ss / static_cast<double>(B > 1 ? B - 1 : 1));
        if (!(sd[static_cast<std::size_t>(k)] > 0.0)) sd[static_cast<std::size_t>(k)] = 1e-300;
    }
    auto aggregate = [&](const double* stats) {
        double best = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < K; ++k)
            best = std::max(best, (stats[k] - mean[static_cast<std::size_t>(k)]) / sd[static_cast<std::size_t>(k)]);
        return best;
    };
    const double t_obs = aggregate(ens.observed.data());
    std::int64_t count_ge = 0;
    for (std::int64_t b = 0; b < B; ++b)
        count_ge += aggregate(ens.replicates.data() + static_cast<std::size_t>(b) * K) >= t_obs;

    TestOutcome out;
    out.method = method;
    out.statistic = t_obs;
    out.pvalue = add_one_pvalue(count_ge, B);
    out.kind = kind;
    out.replicates = B;
    out.seed = seed;
    return out;
}

std::int64_t poisson_n(double rate, Rng& rng) {
    if (!(rate > 0.0)) throw ValidationError("poisson_n: rate must be positive");
    for (;;) {
        const std::int64_t n = rng.poisson(rate);
        if (n >= 2) return n;
    }
}

}  // namespace mvtest
