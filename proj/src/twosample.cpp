#include "mvtest/twosample.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include <omp.h>

#include "mvtest/errors.hpp"
#include "mvtest/specials.hpp"

namespace mvtest {

namespace {

constexpr double kLogGuard = 1e-300;  // floor for log-distance terms

struct PairSums {
    double log_xx = 0, log_xy = 0, log_yy = 0;
    double sqrt_xx = 0, sqrt_xy = 0, sqrt_yy = 0;
    std::array<double, 10> kern_xx{}, kern_xy{}, kern_yy{};
};

// One serial pass over all pairs in fixed order; callers running inside
// the replicate-parallel loop stay deterministic for free.
PairSums pair_sums(const TsContext& ctx, const LabelSplit& split, bool want_log, bool want_sqrt, bool want_kern) {
    PairSums s;
    const std::int64_t N = ctx.N;
    std::size_t t = 0;
    for (std::int64_t i = 0; i < N - 1; ++i) {
        const int li = split.labels[static_cast<std::size_t>(i)];
        for (std::int64_t j = i + 1; j < N; ++j, ++t) {
            const int cls = li + split.labels[static_cast<std::size_t>(j)];  // 0 xx, 1 xy, 2 yy
            if (want_log) {
                const double v = ctx.logd[t];
                (cls == 0 ? s.log_xx : cls == 1 ? s.log_xy : s.log_yy) += v;
            }
            if (want_sqrt) {
                const double v = ctx.sqrtd[t];
                (cls == 0 ? s.sqrt_xx : cls == 1 ? s.sqrt_xy : s.sqrt_yy) += v;
            }
            if (want_kern) {
                const double* kv = ctx.kern.data() + t * 10;
                auto& dst = cls == 0 ? s.kern_xx : cls == 1 ? s.kern_xy : s.kern_yy;
                for (int k = 0; k < 10; ++k) dst[static_cast<std::size_t>(k)] += kv[k];
            }
        }
    }
    return s;
}

double nn_fraction(const TsContext& ctx, const LabelSplit& split, int k) {
    const std::int64_t N = ctx.N;
    if (k < 1 || k > static_cast<int>(ctx.nn5.size() / static_cast<std::size_t>(N)))
        throw ValidationError("nn_fraction: neighbor list too short");
    if (k >= N - 1) throw ValidationError("nn_fraction: k must be below N-1");
    const int stride = static_cast<int>(ctx.nn5.size() / static_cast<std::size_t>(N));
    double acc0 = 0.0, acc1 = 0.0;
    for (std::int64_t i = 0; i < N; ++i) {
        const int li = split.labels[static_cast<std::size_t>(i)];
        int same = 0;
        for (int t = 0; t < k; ++t)
            same += split.labels[static_cast<std::size_t>(ctx.nn5[static_cast<std::size_t>(i) * stride + t])] == li;
        const double frac = static_cast<double>(same) / k;
        (li == 0 ? acc0 : acc1) += frac;
    }
    return acc0 / static_cast<double>(split.n) + acc1 / static_cast<double>(split.m);
}

}  // namespace

const char* ts_tag(TsFlavor f) {
    switch (f) {
        case TsFlavor::KS: return "KS";
        case TsFlavor::K: return "K";
        case TsFlavor::CvM: return "CvM";
        case TsFlavor::AD: return "AD";
        case TsFlavor::NN1: return "NN1";
        case TsFlavor::NN5: return "NN5";
        case TsFlavor::AZ: return "AZ";
        case TsFlavor::BF: return "BF";
        case TsFlavor::BFpaper: return "BF-paper";
        case TsFlavor::BG: return "BG";
        case TsFlavor::FR: return "FR";
        case TsFlavor::NN0: return "NN0";
    }
    return "?";
}

std::optional<TsFlavor> ts_flavor_from_tag(const std::string& tag) {
    static const std::pair<const char*, TsFlavor> table[] = {
        {"KS", TsFlavor::KS},     {"K", TsFlavor::K},           {"CvM", TsFlavor::CvM},
        {"AD", TsFlavor::AD},     {"NN1", TsFlavor::NN1},       {"NN5", TsFlavor::NN5},
        {"AZ", TsFlavor::AZ},     {"BF", TsFlavor::BF},         {"BF-paper", TsFlavor::BFpaper},
        {"BG", TsFlavor::BG},     {"FR", TsFlavor::FR},         {"NN0", TsFlavor::NN0},
    };
    for (const auto& [name, f] : table)
        if (tag == name) return f;
    return std::nullopt;
}

TsContext make_ts_context(const ContinuousSample& s1, const ContinuousSample& s2, bool need_edf, bool need_nn,
                          bool need_mst, bool need_logd, bool need_sqrtd, bool need_mmd) {
    auto [pool, split] = pooled(s1, s2);
    TsContext ctx;
    ctx.pool = std::move(pool);
    ctx.n = split.n;
    ctx.m = split.m;
    ctx.N = split.n + split.m;

    const bool need_dist = need_nn || need_mst || need_logd || need_sqrtd || need_mmd;
    if (need_dist) ctx.dist = pairwise_distances(ctx.pool);

    if (need_edf) {
        ctx.dom = dominance_matrix(ctx.pool);
        ctx.dom_total.assign(static_cast<std::size_t>(ctx.N), 0);
        for (std::int64_t i = 0; i < ctx.N; ++i) {
            std::int64_t tot = 0;
            const std::uint8_t* row = ctx.dom.data() + static_cast<std::size_t>(i) * ctx.N;
            for (std::int64_t j = 0; j < ctx.N; ++j) tot += row[j];
            ctx.dom_total[static_cast<std::size_t>(i)] = tot;
        }
    }
    if (need_nn) {
        const int k = ctx.N >= 7 ? 5 : 1;
        ctx.nn5 = knn_indices(ctx.dist, k);
    }
    if (need_mst) {
        if (ctx.N < 3) throw ValidationError("spanning-tree statistics need at least 3 pooled points");
        ctx.mst = minimum_spanning_tree(ctx.dist);
        std::vector<int> deg(static_cast<std::size_t>(ctx.N), 0);
        for (const auto& [a, b] : ctx.mst) {
            ++deg[static_cast<std::size_t>(a)];
            ++deg[static_cast<std::size_t>(b)];
        }
        double c = 0.0;
        for (int d : deg) c += 0.5 * d * (d - 1);
        ctx.mst_pairs_sharing_node = c;
    }
    const std::size_t npairs = ctx.dist.d.size();
    if (need_logd) {
        ctx.logd.resize(npairs);
        for (std::size_t t = 0; t < npairs; ++t) ctx.logd[t] = std::log(std::max(ctx.dist.d[t], kLogGuard));
    }
    if (need_sqrtd) {
        ctx.sqrtd.resize(npairs);
        for (std::size_t t = 0; t < npairs; ++t) ctx.sqrtd[t] = std::sqrt(ctx.dist.d[t]);
    }
    if (need_mmd) {
        ctx.bandwidths = mmd_bandwidths(ctx.dist);
        ctx.kern.resize(npairs * 10);
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && npairs > 4096)
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(npairs); ++t) {
            const double r2 = ctx.dist.d[static_cast<std::size_t>(t)] * ctx.dist.d[static_cast<std::size_t>(t)];
            for (int k = 0; k < 10; ++k) {
                const double h = ctx.bandwidths[static_cast<std::size_t>(k)];
                ctx.kern[static_cast<std::size_t>(t) * 10 + k] = std::exp(-r2 / (2.0 * h * h));
            }
        }
    }
    return ctx;
}

TsEdfStats ts_edf_stats(const TsContext& ctx, const LabelSplit& split) {
    const std::int64_t N = ctx.N;
    const double n = static_cast<double>(split.n), m = static_cast<double>(split.m);
    double ks = 0.0, up = 0.0, down = 0.0, cvm = 0.0, ad = 0.0;
    for (std::int64_t i = 0; i < N; ++i) {
        const std::uint8_t* row = ctx.dom.data() + static_cast<std::size_t>(i) * N;
        std::int64_t c1 = 0;
        for (std::int64_t j = 0; j < N; ++j) c1 += row[j] & static_cast<std::uint8_t>(split.labels[j] == 0);
        const std::int64_t ctot = ctx.dom_total[static_cast<std::size_t>(i)];
        const std::int64_t c2 = ctot - c1;
        const double diff = static_cast<double>(c1) / n - static_cast<double>(c2) / m;
        ks = std::max(ks, std::abs(diff));
        up = std::max(up, diff);
        down = std::max(down, -diff);
        cvm += diff * diff;
        const double h = static_cast<double>(ctot) / static_cast<double>(N);
        if (h > 0.0 && h < 1.0) ad += diff * diff / (h * (1.0 - h));
    }
    return {ks, std::max(up, 0.0) + std::max(down, 0.0), cvm, ad};
}

std::vector<double> mmd_bandwidths(const DistanceMatrix& dist) {
    if (dist.d.empty()) throw ValidationError("mmd_bandwidths: no pairs");
    std::vector<double> v = dist.d;
    std::sort(v.begin(), v.end());
    const std::size_t np = v.size();
    const double median = np % 2 ? v[np / 2] : 0.5 * (v[np / 2 - 1] + v[np / 2]);
    if (!(median > 0.0)) throw NumericError("mmd_bandwidths: degenerate sample, median pairwise distance is zero");
    std::vector<double> h(10);
    for (int k = -4; k <= 5; ++k) h[static_cast<std::size_t>(k + 4)] = median * std::pow(2.0, k);
    return h;
}

std::vector<double> mmd_stats(const TsContext& ctx, const LabelSplit& split) {
    const PairSums s = pair_sums(ctx, split, false, false, true);
    const double n = static_cast<double>(split.n), m = static_cast<double>(split.m);
    std::vector<double> out(10);
    for (int k = 0; k < 10; ++k)
        out[static_cast<std::size_t>(k)] = 2.0 * s.kern_xx[static_cast<std::size_t>(k)] / (n * (n - 1.0)) +
                                           2.0 * s.kern_yy[static_cast<std::size_t>(k)] / (m * (m - 1.0)) -
                                           2.0 * s.kern_xy[static_cast<std::size_t>(k)] / (n * m);
    return out;
}

double fr_standardized(const TsContext& ctx, const LabelSplit& split) {
    const double N = static_cast<double>(ctx.N);
    const double n = static_cast<double>(split.n), m = static_cast<double>(split.m);
    const double e = static_cast<double>(ctx.mst.size());
    const double C = ctx.mst_pairs_sharing_node;

    std::int64_t R = 0;
    for (const auto& [a, b] : ctx.mst) R += split.labels[static_cast<std::size_t>(a)] != split.labels[static_cast<std::size_t>(b)];

    // Moments of the cross-edge count over hypergeometric labelings.
    const double p1 = 2.0 * n * m / (N * (N - 1.0));
    const double p2 = n * m / (N * (N - 1.0));
    const double mu = e * p1;
    const double ordered_sharing = 2.0 * C;
    const double ordered_disjoint = e * (e - 1.0) - ordered_sharing;
    double second = e * p1 + ordered_sharing * p2;
    if (ordered_disjoint > 0.0) {
        const double p3 = 4.0 * n * (n - 1.0) * m * (m - 1.0) / (N * (N - 1.0) * (N - 2.0) * (N - 3.0));
        second += ordered_disjoint * p3;
    }
    const double var = second - mu * mu;
    if (!(var > 0.0)) throw NumericError("fr_standardized: degenerate label variance");
    return (mu - static_cast<double>(R)) / std::sqrt(var);
}

std::int64_t nn0_count(const TsContext& ctx, const LabelSplit& split) {
    const int stride = static_cast<int>(ctx.nn5.size() / static_cast<std::size_t>(ctx.N));
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < ctx.N; ++i)
        if (split.labels[static_cast<std::size_t>(i)] == 0)
            count += split.labels[static_cast<std::size_t>(ctx.nn5[static_cast<std::size_t>(i) * stride])] == 0;
    return count;
}

double ts_stat(const TsContext& ctx, const LabelSplit& split, TsFlavor f) {
    const double n = static_cast<double>(split.n), m = static_cast<double>(split.m);
    switch (f) {
        case TsFlavor::KS: return ts_edf_stats(ctx, split).ks;
        case TsFlavor::K: return ts_edf_stats(ctx, split).k;
        case TsFlavor::CvM: return ts_edf_stats(ctx, split).cvm;
        case TsFlavor::AD: return ts_edf_stats(ctx, split).ad;
        case TsFlavor::NN1: return nn_fraction(ctx, split, 1);
        case TsFlavor::NN5: return nn_fraction(ctx, split, 5);
        case TsFlavor::AZ: {
            const PairSums s = pair_sums(ctx, split, true, false, false);
            return s.log_xy / (n * m) - s.log_xx / (n * n) - s.log_yy / (m * m);
        }
        case TsFlavor::BF: {
            const PairSums s = pair_sums(ctx, split, false, true, false);
            return n * m / (n + m) * (s.sqrt_xy / (n * m) - s.sqrt_xx / (n * n) - s.sqrt_yy / (m * m));
        }
        case TsFlavor::BFpaper: {
            // printed form: within-first-sample term enters with a plus sign
            const PairSums s = pair_sums(ctx, split, false, true, false);
            return n * m / (n + m) * (s.sqrt_xy / (n * m) + s.sqrt_xx / (n * n) - s.sqrt_yy / (m * m));
        }
        case TsFlavor::BG: {
            const PairSums s = pair_sums(ctx, split, false, true, false);
            const double bxy = s.sqrt_xy / (n * m);
            const double bxx = 2.0 * s.sqrt_xx / (n * (n - 1.0));
            const double byy = 2.0 * s.sqrt_yy / (m * (m - 1.0));
            return (bxx - bxy) * (bxx - bxy) + (byy - bxy) * (byy - bxy);
        }
        case TsFlavor::FR: return fr_standardized(ctx, split);
        case TsFlavor::NN0: return static_cast<double>(nn0_count(ctx, split));
    }
    throw ValidationError("ts_stat: bad flavor");
}

// ---------------------------------------------------------------------------
// batteries

namespace {

struct BatteryPlan {
    std::vector<std::string> tags;
    std::vector<int> scalar_col;        // per tag: column index or -1
    std::vector<TsFlavor> scalar_flav;  // per scalar column
    bool has_mmd = false;
    int mmd_col0 = -1;
    std::vector<std::string> direct;  // tags resolved without the ensemble
    int n_stats = 0;
};

BatteryPlan plan_battery(const std::vector<std::string>& tags, bool permutation_only) {
    BatteryPlan p;
    p.tags = tags;
    p.scalar_col.assign(tags.size(), -1);
    std::set<std::string> seen;
    for (std::size_t t = 0; t < tags.size(); ++t) {
        const auto& tag = tags[t];
        if (!seen.insert(tag).second) throw ValidationError("duplicate method tag \"" + tag + "\"");
        if (tag == "MMD") {
            p.has_mmd = true;
            continue;
        }
        if (tag == "ES" || tag == "EP") {
            if (permutation_only) throw ValidationError("chi-square tags have no permutation form here");
            p.direct.push_back(tag);
            continue;
        }
        const auto f = ts_flavor_from_tag(tag);
        if (!f) throw ValidationError("unknown two-sample method \"" + tag + "\"");
        if (!permutation_only && (*f == TsFlavor::FR || *f == TsFlavor::NN0)) {
            p.direct.push_back(tag);
            continue;
        }
        p.scalar_col[t] = static_cast<int>(p.scalar_flav.size());
        p.scalar_flav.push_back(*f);
    }
    p.n_stats = static_cast<int>(p.scalar_flav.size());
    if (p.has_mmd) {
        p.mmd_col0 = p.n_stats;
        p.n_stats += 10;
    }
    return p;
}

bool needs_edf(const std::vector<TsFlavor>& fl) {
    for (auto f : fl)
        if (f == TsFlavor::KS || f == TsFlavor::K || f == TsFlavor::CvM || f == TsFlavor::AD) return true;
    return false;
}
bool needs_nn(const std::vector<TsFlavor>& fl) {
    for (auto f : fl)
        if (f == TsFlavor::NN1 || f == TsFlavor::NN5 || f == TsFlavor::NN0) return true;
    return false;
}
bool needs_mst(const std::vector<TsFlavor>& fl) {
    for (auto f : fl)
        if (f == TsFlavor::FR) return true;
    return false;
}
bool needs_log(const std::vector<TsFlavor>& fl) {
    for (auto f : fl)
        if (f == TsFlavor::AZ) return true;
    return false;
}
bool needs_sqrt(const std::vector<TsFlavor>& fl) {
    for (auto f : fl)
        if (f == TsFlavor::BF || f == TsFlavor::BFpaper || f == TsFlavor::BG) return true;
    return false;
}

// Shared split evaluation: every scalar column plus the MMD bandwidth
// columns, computing each context feature at most once per split.
void eval_columns(const TsContext& ctx, const BatteryPlan& p, const LabelSplit& split, std::span<double> out) {
    bool edf_done = false;
    TsEdfStats edf{0, 0, 0, 0};
    bool sums_done = false;
    PairSums sums;
    const bool want_log = needs_log(p.scalar_flav), want_sqrt = needs_sqrt(p.scalar_flav);
    for (int c = 0; c < static_cast<int>(p.scalar_flav.size()); ++c) {
        const TsFlavor f = p.scalar_flav[static_cast<std::size_t>(c)];
        switch (f) {
            case TsFlavor::KS:
            case TsFlavor::K:
            case TsFlavor::CvM:
            case TsFlavor::AD:
                if (!edf_done) {
                    edf = ts_edf_stats(ctx, split);
                    edf_done = true;
                }
                out[static_cast<std::size_t>(c)] = f == TsFlavor::KS   ? edf.ks
                                                   : f == TsFlavor::K  ? edf.k
                                                   : f == TsFlavor::CvM ? edf.cvm
                                                                        : edf.ad;
                break;
            case TsFlavor::AZ:
            case TsFlavor::BF:
            case TsFlavor::BFpaper:
            case TsFlavor::BG: {
                if (!sums_done) {
                    sums = pair_sums(ctx, split, want_log, want_sqrt, false);
                    sums_done = true;
                }
                const double n = static_cast<double>(split.n), m = static_cast<double>(split.m);
                double v = 0.0;
                if (f == TsFlavor::AZ)
                    v = sums.log_xy / (n * m) - sums.log_xx / (n * n) - sums.log_yy / (m * m);
                else if (f == TsFlavor::BF)
                    v = n * m / (n + m) * (sums.sqrt_xy / (n * m) - sums.sqrt_xx / (n * n) - sums.sqrt_yy / (m * m));
                else if (f == TsFlavor::BFpaper)
                    v = n * m / (n + m) * (sums.sqrt_xy / (n * m) + sums.sqrt_xx / (n * n) - sums.sqrt_yy / (m * m));
                else {
                    const double bxy = sums.sqrt_xy / (n * m);
                    const double bxx = 2.0 * sums.sqrt_xx / (n * (n - 1.0));
                    const double byy = 2.0 * sums.sqrt_yy / (m * (m - 1.0));
                    v = (bxx - bxy) * (bxx - bxy) + (byy - bxy) * (byy - bxy);
                }
                out[static_cast<std::size_t>(c)] = v;
                break;
            }
            default:
                out[static_cast<std::size_t>(c)] = ts_stat(ctx, split, f);
        }
    }
    if (p.has_mmd) {
        const auto mm = mmd_stats(ctx, split);
        for (int k = 0; k < 10; ++k) out[static_cast<std::size_t>(p.mmd_col0 + k)] = mm[static_cast<std::size_t>(k)];
    }
}

EnsembleResult slice_ensemble(const EnsembleResult& ens, int col0, int k) {
    EnsembleResult out;
    out.B = ens.B;
    out.n_stats = k;
    out.observed.assign(ens.observed.begin() + col0, ens.observed.begin() + col0 + k);
    out.replicates.resize(static_cast<std::size_t>(ens.B) * k);
    for (std::int64_t b = 0; b < ens.B; ++b)
        for (int c = 0; c < k; ++c) out.replicates[static_cast<std::size_t>(b) * k + c] = ens.rep(b, col0 + c);
    return out;
}

}  // namespace

std::vector<TestOutcome> ts_battery(const ContinuousSample& s1, const ContinuousSample& s2,
                                    const std::vector<std::string>& tags, std::int64_t B, const RngPlan& plan,
                                    bool exhaustive, int grid_nx, int grid_ny) {
    const BatteryPlan p = plan_battery(tags, false);
    const bool direct_fr = std::find(p.direct.begin(), p.direct.end(), "FR") != p.direct.end();
    const bool direct_nn0 = std::find(p.direct.begin(), p.direct.end(), "NN0") != p.direct.end();
    TsContext ctx = make_ts_context(s1, s2, needs_edf(p.scalar_flav), needs_nn(p.scalar_flav) || direct_nn0,
                                    needs_mst(p.scalar_flav) || direct_fr, needs_log(p.scalar_flav),
                                    needs_sqrt(p.scalar_flav), p.has_mmd);

    EnsembleResult ens;
    if (p.n_stats > 0) {
        const auto eval = [&](const LabelSplit& split, std::span<double> out) { eval_columns(ctx, p, split, out); };
        ens = permutation_ensemble(ctx.N, ctx.n, p.n_stats, eval, B, plan, exhaustive);
    }

    std::vector<TestOutcome> results;
    results.reserve(tags.size());
    LabelSplit identity;
    identity.labels.assign(static_cast<std::size_t>(ctx.N), 1);
    std::fill(identity.labels.begin(), identity.labels.begin() + ctx.n, std::uint8_t{0});
    identity.n = ctx.n;
    identity.m = ctx.m;

    for (std::size_t t = 0; t < tags.size(); ++t) {
        const auto& tag = tags[t];
        if (p.scalar_col[t] >= 0) {
            const int c = p.scalar_col[t];
            TestOutcome o;
            o.method = tag;
            o.statistic = ens.observed[static_cast<std::size_t>(c)];
            o.pvalue = ens.pvalue(c);
            o.kind = PValueKind::permutation;
            o.replicates = ens.B;
            o.seed = plan.master_seed;
            results.push_back(std::move(o));
        } else if (tag == "MMD") {
            TestOutcome o = max_standardized_from_ensemble(slice_ensemble(ens, p.mmd_col0, 10), "MMD",
                                                           PValueKind::permutation, plan.master_seed);
            results.push_back(std::move(o));
        } else if (tag == "FR") {
            TestOutcome o;
            o.method = "FR";
            o.statistic = fr_standardized(ctx, identity);
            o.pvalue = normal_cdf(-o.statistic);
            o.kind = PValueKind::asymptotic;
            o.replicates = 0;
            o.seed = plan.master_seed;
            results.push_back(std::move(o));
        } else if (tag == "NN0") {
            const std::int64_t count = nn0_count(ctx, identity);
            TestOutcome o;
            o.method = "NN0";
            o.statistic = static_cast<double>(count);
            o.pvalue = binom_sf(count, ctx.n, static_cast<double>(ctx.n - 1) / static_cast<double>(ctx.N - 1));
            o.kind = PValueKind::asymptotic;
            o.replicates = 0;
            o.seed = plan.master_seed;
            results.push_back(std::move(o));
        } else {  // ES / EP
            results.push_back(twosample_chisq(s1, s2, grid_nx, grid_ny, tag == "ES" ? BinRule::ES : BinRule::EP));
        }
    }
    return results;
}

TestOutcome ts_test(const ContinuousSample& s1, const ContinuousSample& s2, const std::string& tag, std::int64_t B,
                    const RngPlan& plan, int grid_nx, int grid_ny) {
    return ts_battery(s1, s2, {tag}, B, plan, false, grid_nx, grid_ny)[0];
}

TestOutcome ts_permutation_test(const ContinuousSample& s1, const ContinuousSample& s2, const std::string& tag,
                                std::int64_t B, const RngPlan& plan, bool exhaustive) {
    const BatteryPlan p = plan_battery({tag}, true);
    TsContext ctx = make_ts_context(s1, s2, needs_edf(p.scalar_flav), needs_nn(p.scalar_flav), needs_mst(p.scalar_flav),
                                    needs_log(p.scalar_flav), needs_sqrt(p.scalar_flav), p.has_mmd);
    const auto eval = [&](const LabelSplit& split, std::span<double> out) { eval_columns(ctx, p, split, out); };
    const auto ens = permutation_ensemble(ctx.N, ctx.n, p.n_stats, eval, B, plan, exhaustive);
    if (tag == "MMD")
        return max_standardized_from_ensemble(ens, "MMD", PValueKind::permutation, plan.master_seed);
    TestOutcome o;
    o.method = tag;
    o.statistic = ens.observed[0];
    o.pvalue = ens.pvalue(0);
    o.kind = PValueKind::permutation;
    o.replicates = ens.B;
    o.seed = plan.master_seed;
    return o;
}

TestOutcome combined_twosample(const ContinuousSample& s1, const ContinuousSample& s2,
                               const std::vector<std::string>& tags, std::int64_t B, const RngPlan& plan) {
    if (tags.size() < 2) throw ValidationError("combined test needs at least 2 members");
    for (const auto& t : tags)
        if (t == "MMD" || t == "ES" || t == "EP" || t == "FR" || t == "NN0")
            throw ValidationError("combined two-sample members must be scalar permutation statistics, got \"" + t + "\"");
    const BatteryPlan p = plan_battery(tags, true);
    TsContext ctx = make_ts_context(s1, s2, needs_edf(p.scalar_flav), needs_nn(p.scalar_flav), needs_mst(p.scalar_flav),
                                    needs_log(p.scalar_flav), needs_sqrt(p.scalar_flav), false);
    const auto eval = [&](const LabelSplit& split, std::span<double> out) { eval_columns(ctx, p, split, out); };
    const auto ens = permutation_ensemble(ctx.N, ctx.n, p.n_stats, eval, B, plan, false);
    return combined_from_ensemble(ens, tags, PValueKind::permutation, plan.master_seed);
}

TestOutcome nn_binomial_test(const ContinuousSample& s1, const ContinuousSample& s2) {
    return ts_battery(s1, s2, {"NN0"}, 1, RngPlan{0}, false)[0];
}

TestOutcome fr_test(const ContinuousSample& s1, const ContinuousSample& s2) {
    return ts_battery(s1, s2, {"FR"}, 1, RngPlan{0}, false)[0];
}

// ---------------------------------------------------------------------------
// discrete two-sample

const char* disc_ts_tag(DiscTsFlavor f) {
    switch (f) {
        case DiscTsFlavor::KS: return "KS";
        case DiscTsFlavor::K: return "K";
        case DiscTsFlavor::CvM: return "CvM";
        case DiscTsFlavor::AD: return "AD";
        case DiscTsFlavor::NN: return "NN";
        case DiscTsFlavor::AZ: return "AZ";
        case DiscTsFlavor::BF: return "BF";
        case DiscTsFlavor::Chisq: return "Chisquare";
    }
    return "?";
}

std::optional<DiscTsFlavor> disc_ts_flavor_from_tag(const std::string& tag) {
    static const std::pair<const char*, DiscTsFlavor> table[] = {
        {"KS", DiscTsFlavor::KS}, {"K", DiscTsFlavor::K},   {"CvM", DiscTsFlavor::CvM},
        {"AD", DiscTsFlavor::AD}, {"NN", DiscTsFlavor::NN}, {"AZ", DiscTsFlavor::AZ},
        {"BF", DiscTsFlavor::BF}, {"Chisquare", DiscTsFlavor::Chisq},
    };
    for (const auto& [name, f] : table)
        if (tag == name) return f;
    return std::nullopt;
}

std::vector<std::int64_t> hypergeometric_split(const std::vector<std::int64_t>& pooled_counts, std::int64_t n1,
                                               Rng& rng) {
    std::int64_t total = 0;
    for (auto z : pooled_counts) total += z;
    if (n1 < 0 || n1 > total) throw ValidationError("hypergeometric_split: n1 out of range");
    std::vector<std::int64_t> out(pooled_counts.size(), 0);
    std::int64_t remaining = total, need = n1;
    for (std::size_t c = 0; c < pooled_counts.size(); ++c) {
        const std::int64_t z = pooled_counts[c];
        if (z == 0) continue;
        if (need == 0) break;
        if (remaining == z) {  // last nonzero cells must absorb the rest
            out[c] = need;
            need = 0;
            break;
        }
        const std::int64_t klo = std::max<std::int64_t>(0, need - (remaining - z));
        const std::int64_t khi = std::min(z, need);
        // pmf by log at klo, then the standard ratio recurrence
        auto lchoose = [](double a, double b) {
            return std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0);
        };
        double lp = lchoose(static_cast<double>(z), static_cast<double>(klo)) +
                    lchoose(static_cast<double>(remaining - z), static_cast<double>(need - klo)) -
                    lchoose(static_cast<double>(remaining), static_cast<double>(need));
        double pf = std::exp(lp);
        const double u = rng.uniform();
        double cum = pf;
        std::int64_t k = klo;
        while (u >= cum && k < khi) {
            pf *= static_cast<double>(z - k) * static_cast<double>(need - k) /
                  (static_cast<double>(k + 1) * static_cast<double>(remaining - z - need + k + 1));
            ++k;
            cum += pf;
        }
        out[c] = k;
        remaining -= z;
        need -= k;
    }
    return out;
}

namespace {

// Immutable-per-permutation structures for the gridded battery.
struct DiscTsContext {
    int gx = 0, gy = 0;
    std::int64_t n1 = 0, n2 = 0, N = 0;
    std::vector<std::int64_t> z;       // pooled counts
    std::vector<double> hcum;          // pooled cumulative fractions
    std::vector<double> logd, sqrtd;   // cell-pair distances (upper triangle incl. guard)
    std::vector<int> nearest_cell;     // per cell: nearest other nonempty cell
    std::vector<int> chisq_group;      // merged-bin map on pooled counts
    int chisq_groups = 0;

    std::size_t pair_off(std::size_t a, std::size_t b) const {  // a < b
        const std::size_t cells = z.size();
        return a * (2 * cells - a - 1) / 2 + (b - a - 1);
    }
};

DiscTsContext make_disc_ts_context(const DiscreteGridSample& a, const DiscreteGridSample& b,
                                   const std::vector<DiscTsFlavor>& flavors) {
    a.validate();
    b.validate();
    if (a.valsx != b.valsx || a.valsy != b.valsy)
        throw ValidationError("discrete two-sample requires identical grids");
    DiscTsContext ctx;
    ctx.gx = a.gx();
    ctx.gy = a.gy();
    ctx.n1 = a.total();
    ctx.n2 = b.total();
    ctx.N = ctx.n1 + ctx.n2;
    const std::size_t cells = a.counts.size();
    ctx.z.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) ctx.z[c] = a.counts[c] + b.counts[c];

    bool want_edf = false, want_dist = false, want_nn = false, want_chisq = false;
    for (auto f : flavors) {
        want_edf |= f == DiscTsFlavor::KS || f == DiscTsFlavor::K || f == DiscTsFlavor::CvM || f == DiscTsFlavor::AD;
        want_dist |= f == DiscTsFlavor::AZ || f == DiscTsFlavor::BF;
        want_nn |= f == DiscTsFlavor::NN;
        want_chisq |= f == DiscTsFlavor::Chisq;
    }

    if (want_edf) {
        std::vector<double> zfrac(cells);
        for (std::size_t c = 0; c < cells; ++c) zfrac[c] = static_cast<double>(ctx.z[c]) / static_cast<double>(ctx.N);
        ctx.hcum.resize(cells);
        for (int j = 0; j < ctx.gy; ++j)
            for (int i = 0; i < ctx.gx; ++i) {
                double acc = zfrac[static_cast<std::size_t>(i + ctx.gx * j)];
                if (i > 0) acc += ctx.hcum[static_cast<std::size_t>(i - 1 + ctx.gx * j)];
                if (j > 0) acc += ctx.hcum[static_cast<std::size_t>(i + ctx.gx * (j - 1))];
                if (i > 0 && j > 0) acc -= ctx.hcum[static_cast<std::size_t>(i - 1 + ctx.gx * (j - 1))];
                ctx.hcum[static_cast<std::size_t>(i + ctx.gx * j)] = acc;
            }
    }

    auto cell_xy = [&](std::size_t c) {
        const int i = static_cast<int>(c) % ctx.gx, j = static_cast<int>(c) / ctx.gx;
        return std::make_pair(a.valsx[static_cast<std::size_t>(i)], a.valsy[static_cast<std::size_t>(j)]);
    };

    if (want_dist) {
        ctx.logd.resize(cells * (cells - 1) / 2);
        ctx.sqrtd.resize(cells * (cells - 1) / 2);
        for (std::size_t p = 0; p < cells; ++p)
            for (std::size_t q = p + 1; q < cells; ++q) {
                const auto [x1, y1] = cell_xy(p);
                const auto [x2, y2] = cell_xy(q);
                const double d = std::hypot(x1 - x2, y1 - y2);
                ctx.logd[ctx.pair_off(p, q)] = std::log(std::max(d, kLogGuard));
                ctx.sqrtd[ctx.pair_off(p, q)] = std::sqrt(d);
            }
    }

    if (want_nn) {
        ctx.nearest_cell.assign(cells, -1);
        for (std::size_t p = 0; p < cells; ++p) {
            double best = std::numeric_limits<double>::infinity();
            int pick = -1;
            for (std::size_t q = 0; q < cells; ++q) {
                if (q == p || ctx.z[q] == 0) continue;
                const auto [x1, y1] = cell_xy(p);
                const auto [x2, y2] = cell_xy(q);
                const double d = std::hypot(x1 - x2, y1 - y2);
                if (d < best) {
                    best = d;
                    pick = static_cast<int>(q);
                }
            }
            ctx.nearest_cell[p] = pick;
        }
    }

    if (want_chisq) {
        BinTable t;
        t.nx = ctx.gx;
        t.ny = ctx.gy;
        t.observed = a.counts;
        t.observed2 = b.counts;
        t.group.resize(cells);
        for (std::size_t c = 0; c < cells; ++c) t.group[c] = static_cast<int>(c);
        t.n_groups = static_cast<int>(cells);
        merge_low_bins(t);  // pooled-count rule; permutation-invariant
        if (t.n_groups < 2) throw ValidationError("discrete chi-square: all cells merged into one bin");
        ctx.chisq_group = t.group;
        ctx.chisq_groups = t.n_groups;
    }
    return ctx;
}

double disc_ts_stat(const DiscTsContext& ctx, const std::vector<std::int64_t>& c1, DiscTsFlavor f) {
    const std::size_t cells = ctx.z.size();
    const double n1 = static_cast<double>(ctx.n1), n2 = static_cast<double>(ctx.n2);
    switch (f) {
        case DiscTsFlavor::KS:
        case DiscTsFlavor::K:
        case DiscTsFlavor::CvM:
        case DiscTsFlavor::AD: {
            double ks = 0.0, up = 0.0, down = 0.0, cvm = 0.0, ad = 0.0;
            std::vector<double> cum(cells, 0.0);
            for (int j = 0; j < ctx.gy; ++j)
                for (int i = 0; i < ctx.gx; ++i) {
                    const std::size_t c = static_cast<std::size_t>(i + ctx.gx * j);
                    double acc = static_cast<double>(c1[c]);
                    if (i > 0) acc += cum[c - 1];
                    if (j > 0) acc += cum[c - static_cast<std::size_t>(ctx.gx)];
                    if (i > 0 && j > 0) acc -= cum[c - 1 - static_cast<std::size_t>(ctx.gx)];
                    cum[c] = acc;
                    const double zcum = ctx.hcum[c] * static_cast<double>(ctx.N);  // pooled cumulative count
                    const double f1 = acc / n1;
                    const double f2 = (zcum - acc) / n2;
                    const double diff = f1 - f2;
                    ks = std::max(ks, std::abs(diff));
                    up = std::max(up, diff);
                    down = std::max(down, -diff);
                    cvm += diff * diff;
                    const double h = ctx.hcum[c];
                    if (h > 1e-12 && h < 1.0 - 1e-12) ad += diff * diff / (h * (1.0 - h));
                }
            switch (f) {
                case DiscTsFlavor::KS: return ks;
                case DiscTsFlavor::K: return std::max(up, 0.0) + std::max(down, 0.0);
                case DiscTsFlavor::CvM: return cvm;
                default: return ad;
            }
        }
        case DiscTsFlavor::NN: {
            // mean same-label share of a uniformly chosen co-located other
            // point; singleton cells borrow the nearest nonempty cell.
            double acc = 0.0;
            for (std::size_t c = 0; c < cells; ++c) {
                const double z = static_cast<double>(ctx.z[c]);
                if (ctx.z[c] == 0) continue;
                const double a1 = static_cast<double>(c1[c]);
                const double a2 = z - a1;
                if (ctx.z[c] >= 2) {
                    acc += a1 * (a1 - 1.0) / (z - 1.0) / n1 + a2 * (a2 - 1.0) / (z - 1.0) / n2;
                } else {
                    const int nb = ctx.nearest_cell[c];
                    if (nb < 0) continue;
                    const double zb = static_cast<double>(ctx.z[static_cast<std::size_t>(nb)]);
                    const double b1 = static_cast<double>(c1[static_cast<std::size_t>(nb)]);
                    acc += a1 * (b1 / zb) / n1 + a2 * ((zb - b1) / zb) / n2;
                }
            }
            return acc;
        }
        case DiscTsFlavor::AZ:
        case DiscTsFlavor::BF: {
            const bool use_log = f == DiscTsFlavor::AZ;
            const double guard = std::log(kLogGuard);
            double sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (std::size_t p = 0; p < cells; ++p) {
                const double a1 = static_cast<double>(c1[p]);
                const double a2 = static_cast<double>(ctx.z[p] - c1[p]);
                // same-cell pairs: distance zero
                if (use_log) {
                    sxx += 0.5 * a1 * (a1 - 1.0) * guard;
                    syy += 0.5 * a2 * (a2 - 1.0) * guard;
                }
                sxy += a1 * a2 * (use_log ? guard : 0.0);
                for (std::size_t q = p + 1; q < cells; ++q) {
                    if (ctx.z[q] == 0 && ctx.z[p] == 0) continue;
                    const double b1 = static_cast<double>(c1[q]);
                    const double b2 = static_cast<double>(ctx.z[q] - c1[q]);
                    const double v = use_log ? ctx.logd[ctx.pair_off(p, q)] : ctx.sqrtd[ctx.pair_off(p, q)];
                    sxx += a1 * b1 * v;
                    syy += a2 * b2 * v;
                    sxy += (a1 * b2 + a2 * b1) * v;
                }
            }
            if (use_log) return sxy / (n1 * n2) - sxx / (n1 * n1) - syy / (n2 * n2);
            return n1 * n2 / (n1 + n2) * (sxy / (n1 * n2) - sxx / (n1 * n1) - syy / (n2 * n2));
        }
        case DiscTsFlavor::Chisq: {
            std::vector<double> o1(static_cast<std::size_t>(ctx.chisq_groups), 0.0),
                o2(static_cast<std::size_t>(ctx.chisq_groups), 0.0);
            for (std::size_t c = 0; c < cells; ++c) {
                o1[static_cast<std::size_t>(ctx.chisq_group[c])] += static_cast<double>(c1[c]);
                o2[static_cast<std::size_t>(ctx.chisq_group[c])] += static_cast<double>(ctx.z[c] - c1[c]);
            }
            const double N = n1 + n2;
            double s = 0.0;
            for (std::size_t g = 0; g < o1.size(); ++g) {
                const double zg = o1[g] + o2[g];
                const double e1 = n1 * zg / N, e2 = n2 * zg / N;
                const double d1 = o1[g] - e1, d2 = o2[g] - e2;
                s += d1 * d1 / e1 + d2 * d2 / e2;
            }
            return s;
        }
    }
    throw ValidationError("disc_ts_stat: bad flavor");
}

}  // namespace

std::vector<TestOutcome> discrete_ts_battery(const DiscreteGridSample& a, const DiscreteGridSample& b,
                                             const std::vector<DiscTsFlavor>& flavors, std::int64_t B,
                                             const RngPlan& plan) {
    if (B < 1) throw ValidationError("discrete_ts_battery: B must be positive");
    const DiscTsContext ctx = make_disc_ts_context(a, b, flavors);
    const int K = static_cast<int>(flavors.size());

    std::vector<double> observed(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) observed[static_cast<std::size_t>(k)] = disc_ts_stat(ctx, a.counts, flavors[static_cast<std::size_t>(k)]);

    std::vector<double> reps(static_cast<std::size_t>(B) * K);
#pragma omp parallel for schedule(dynamic, 8) if (omp_get_level() == 0 && B > 1)
    for (std::int64_t bb = 0; bb < B; ++bb) {
        Rng rng = plan.stream(static_cast<std::uint64_t>(bb));
        const auto c1 = hypergeometric_split(ctx.z, ctx.n1, rng);
        for (int k = 0; k < K; ++k)
            reps[static_cast<std::size_t>(bb) * K + k] = disc_ts_stat(ctx, c1, flavors[static_cast<std::size_t>(k)]);
    }

    std::vector<TestOutcome> out(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        std::int64_t count = 0;
        for (std::int64_t bb = 0; bb < B; ++bb)
            count += reps[static_cast<std::size_t>(bb) * K + k] >= observed[static_cast<std::size_t>(k)];
        auto& o = out[static_cast<std::size_t>(k)];
        o.method = disc_ts_tag(flavors[static_cast<std::size_t>(k)]);
        o.statistic = observed[static_cast<std::size_t>(k)];
        o.pvalue = add_one_pvalue(count, B);
        o.kind = PValueKind::permutation;
        o.replicates = B;
        o.seed = plan.master_seed;
    }
    return out;
}

TestOutcome discrete_twosample(const DiscreteGridSample& a, const DiscreteGridSample& b, DiscTsFlavor flavor,
                               std::int64_t B, const RngPlan& plan) {
    return discrete_ts_battery(a, b, {flavor}, B, plan)[0];
}

}  // namespace mvtest
