#include "mvtest/methods.hpp"

#include <algorithm>
#include <set>

#include "mvtest/errors.hpp"

namespace mvtest {

std::string to_string(ProblemKind k) {
    switch (k) {
        case ProblemKind::GofContinuous: return "gof-continuous";
        case ProblemKind::GofDiscrete: return "gof-discrete";
        case ProblemKind::TsContinuous: return "twosample-continuous";
        case ProblemKind::TsDiscrete: return "twosample-discrete";
    }
    return "?";
}

const std::vector<MethodInfo>& method_registry() {
    static const std::vector<MethodInfo> reg = [] {
        std::vector<MethodInfo> r;
        const auto G = ProblemKind::GofContinuous;
        r.push_back({"qKS", G, 1, 0, true, false, true, "bootstrap", "max |F - Fhat| at the data points"});
        r.push_back({"qK", G, 1, 0, true, false, true, "bootstrap", "one-sided EDF maxima summed (Kuiper form)"});
        r.push_back({"qCvM", G, 1, 0, true, false, true, "bootstrap", "sum of squared EDF differences"});
        r.push_back({"qAD", G, 1, 0, true, false, true, "bootstrap", "squared EDF differences weighted by F(1-F)"});
        r.push_back({"BB", G, 1, 0, false, true, true, "bootstrap", "nearest-neighbor ball volumes uniformized"});
        r.push_back({"BR", G, 1, 0, false, true, true, "bootstrap", "kernel density estimate vs null density"});
        r.push_back({"FF", G, 2, 2, true, false, true, "bootstrap", "EDF max after the Rosenblatt transform"});
        r.push_back({"RK", G, 2, 2, true, false, true, "bootstrap", "Ripley K discrepancy on the transformed square"});
        r.push_back({"ES", G, 2, 2, true, false, false, "asymptotic", "chi-square, equal-size bins"});
        r.push_back({"EP", G, 2, 2, true, false, false, "asymptotic", "chi-square, equal-probability bins"});

        const auto D = ProblemKind::GofDiscrete;
        for (const char* t : {"KS", "K", "CvM", "AD"})
            r.push_back({t, D, 2, 2, false, false, false, "simulation", "EDF distance on cumulative grid counts"});
        r.push_back({"P", D, 2, 2, false, false, false, "simulation", "Pearson sum over cells"});
        r.push_back({"TV", D, 2, 2, false, false, false, "simulation", "total-variation style count distance"});
        r.push_back({"KL", D, 2, 2, false, false, false, "simulation", "likelihood-ratio count distance"});
        r.push_back({"H", D, 2, 2, false, false, false, "simulation", "Hellinger count distance"});

        const auto T = ProblemKind::TsContinuous;
        for (const char* t : {"KS", "K", "CvM", "AD"})
            r.push_back({t, T, 1, 0, false, false, false, "permutation", "EDF distance between the pooled-point ecdfs"});
        r.push_back({"NN1", T, 1, 0, false, false, false, "permutation", "mean same-sample share of 1 nearest neighbor"});
        r.push_back({"NN5", T, 1, 0, false, false, false, "permutation", "mean same-sample share of 5 nearest neighbors"});
        r.push_back({"AZ", T, 1, 0, false, false, false, "permutation", "log-kernel energy distance"});
        r.push_back({"BF", T, 1, 0, false, false, false, "permutation", "root-distance energy distance"});
        r.push_back({"BF-paper", T, 1, 0, false, false, false, "permutation",
                     "root-distance energy distance, printed sign variant"});
        r.push_back({"BG", T, 1, 0, false, false, false, "permutation", "squared contrast of mean within/between distances"});
        r.push_back({"MMD", T, 1, 0, false, false, false, "permutation", "kernel MMD maximized over 10 bandwidths"});
        r.push_back({"FR", T, 1, 0, false, false, false, "asymptotic", "spanning-tree cross-edge runs test"});
        r.push_back({"NN0", T, 1, 0, false, false, false, "exact", "binomial count of within-sample nearest neighbors"});
        r.push_back({"ES", T, 2, 2, false, false, false, "asymptotic", "two-sample chi-square, equal-size bins"});
        r.push_back({"EP", T, 2, 2, false, false, false, "asymptotic", "two-sample chi-square, pooled-quantile bins"});

        const auto S = ProblemKind::TsDiscrete;
        for (const char* t : {"KS", "K", "CvM", "AD"})
            r.push_back({t, S, 2, 2, false, false, false, "permutation", "EDF distance on cumulative grid counts"});
        r.push_back({"NN", S, 2, 2, false, false, false, "permutation", "same-sample share among co-located points"});
        r.push_back({"AZ", S, 2, 2, false, false, false, "permutation", "log-kernel energy distance on cell coordinates"});
        r.push_back({"BF", S, 2, 2, false, false, false, "permutation", "root-distance energy distance on cell coordinates"});
        r.push_back({"Chisquare", S, 2, 2, false, false, false, "permutation", "Pearson statistic on merged cells"});
        return r;
    }();
    return reg;
}

const MethodInfo* find_method(const std::string& tag, ProblemKind kind) {
    for (const auto& m : method_registry())
        if (m.kind == kind && m.tag == tag) return &m;
    return nullptr;
}

std::optional<HybridTag> parse_hybrid_tag(const std::string& tag) {
    if (tag.size() < 3 || tag[tag.size() - 2] != 'T') return std::nullopt;
    const char r = tag.back();
    if (r != '1' && r != '5') return std::nullopt;
    const std::string base = tag.substr(0, tag.size() - 2);
    const auto* info = find_method(base, ProblemKind::TsContinuous);
    if (!info || base == "ES" || base == "EP") return std::nullopt;  // permutation forms only
    return HybridTag{base, r == '1' ? 1 : 5};
}

namespace {

enum class GofBootFlavor { qKS, qK, qCvM, qAD, BB, BR, FF, RK };

std::optional<GofBootFlavor> gof_boot_flavor(const std::string& tag) {
    if (tag == "qKS") return GofBootFlavor::qKS;
    if (tag == "qK") return GofBootFlavor::qK;
    if (tag == "qCvM") return GofBootFlavor::qCvM;
    if (tag == "qAD") return GofBootFlavor::qAD;
    if (tag == "BB") return GofBootFlavor::BB;
    if (tag == "BR") return GofBootFlavor::BR;
    if (tag == "FF") return GofBootFlavor::FF;
    if (tag == "RK") return GofBootFlavor::RK;
    return std::nullopt;
}

void check_gof_capabilities(const NullModel& model, const ContinuousSample& s, GofBootFlavor f,
                            const std::string& tag) {
    model.require_sampler(tag);
    model.require_dim(s.d, tag);
    switch (f) {
        case GofBootFlavor::qKS:
        case GofBootFlavor::qK:
        case GofBootFlavor::qCvM:
        case GofBootFlavor::qAD:
            model.require_cdf(tag);
            break;
        case GofBootFlavor::BB:
        case GofBootFlavor::BR:
            model.require_pdf(tag);
            break;
        case GofBootFlavor::FF:
        case GofBootFlavor::RK:
            model.require_cdf(tag);
            if (s.d != 2) throw CapabilityError(tag + " is bivariate only");
            break;
    }
}

// Shared-ensemble evaluation across the bootstrap GOF statistics: the EDF
// pairs are computed once when any quick flavor is present.
struct GofBootGroup {
    std::vector<GofBootFlavor> flavors;
    std::vector<double> rk_radii;
    BBOptions bb;
    std::uint64_t ball_seed = 0;

    void eval(const ContinuousSample& rep, const NullModel& m, std::span<double> out) const {
        bool pairs_done = false;
        EdfPairs pairs;
        for (std::size_t c = 0; c < flavors.size(); ++c) {
            switch (flavors[c]) {
                case GofBootFlavor::qKS:
                case GofBootFlavor::qK:
                case GofBootFlavor::qCvM:
                case GofBootFlavor::qAD: {
                    if (!pairs_done) {
                        pairs = edf_pairs(rep, m);
                        pairs_done = true;
                    }
                    const EdfFlavor ef = flavors[c] == GofBootFlavor::qKS   ? EdfFlavor::KS
                                         : flavors[c] == GofBootFlavor::qK ? EdfFlavor::K
                                         : flavors[c] == GofBootFlavor::qCvM ? EdfFlavor::CvM
                                                                             : EdfFlavor::AD;
                    out[c] = edf_stat(ef, pairs);
                    break;
                }
                case GofBootFlavor::BB:
                    out[c] = uniform_ks_stat(bb_transform(rep, m, bb, ball_seed).u);
                    break;
                case GofBootFlavor::BR:
                    out[c] = br_stat(rep, m);
                    break;
                case GofBootFlavor::FF:
                    out[c] = ff_stat(rep, m);
                    break;
                case GofBootFlavor::RK:
                    out[c] = ripley_k_stat(rep, m, rk_radii);
                    break;
            }
        }
    }
};

const char* gof_boot_tag(GofBootFlavor f) {
    switch (f) {
        case GofBootFlavor::qKS: return "qKS";
        case GofBootFlavor::qK: return "qK";
        case GofBootFlavor::qCvM: return "qCvM";
        case GofBootFlavor::qAD: return "qAD";
        case GofBootFlavor::BB: return "BB";
        case GofBootFlavor::BR: return "BR";
        case GofBootFlavor::FF: return "FF";
        case GofBootFlavor::RK: return "RK";
    }
    return "?";
}

EnsembleResult gof_boot_ensemble(const ContinuousSample& s, const NullModel& model, const GofBootGroup& group,
                                 const GofOptions& opt, const RngPlan& plan) {
    const auto eval = [&group](const ContinuousSample& rep, const NullModel& m, std::span<double> out) {
        group.eval(rep, m, out);
    };
    return bootstrap_ensemble(s, model, static_cast<int>(group.flavors.size()), eval, opt.B,
                              plan.sub(hash64("gof-boot")), opt.poisson_rate);
}

GofBootGroup make_gof_group(const ContinuousSample& s, const NullModel& model,
                            const std::vector<GofBootFlavor>& flavors, const GofOptions& opt, const RngPlan& plan) {
    GofBootGroup g;
    g.flavors = flavors;
    g.bb = opt.bb;
    g.rk_radii = opt.rk_radii.empty() ? default_rk_radii() : opt.rk_radii;
    g.ball_seed = plan.sub(hash64("bb-balls")).master_seed;
    for (auto f : flavors) check_gof_capabilities(model, s, f, gof_boot_tag(f));
    return g;
}

}  // namespace

std::vector<TestOutcome> run_gof(const ContinuousSample& s, const NullModel& model,
                                 const std::vector<std::string>& tags, const GofOptions& opt, const RngPlan& plan) {
    s.validate();
    if (tags.empty()) throw ValidationError("run_gof: no method tags");
    std::set<std::string> seen;
    std::vector<GofBootFlavor> boot_flavors;
    std::vector<int> boot_col(tags.size(), -1);
    for (std::size_t t = 0; t < tags.size(); ++t) {
        if (!seen.insert(tags[t]).second) throw ValidationError("duplicate method tag \"" + tags[t] + "\"");
        if (const auto f = gof_boot_flavor(tags[t])) {
            boot_col[t] = static_cast<int>(boot_flavors.size());
            boot_flavors.push_back(*f);
            continue;
        }
        if (tags[t] == "ES" || tags[t] == "EP" || parse_hybrid_tag(tags[t])) continue;
        throw ValidationError("unknown goodness-of-fit method \"" + tags[t] + "\"");
    }

    EnsembleResult ens;
    if (!boot_flavors.empty()) {
        const GofBootGroup group = make_gof_group(s, model, boot_flavors, opt, plan);
        ens = gof_boot_ensemble(s, model, group, opt, plan);
    }

    std::vector<TestOutcome> out;
    out.reserve(tags.size());
    for (std::size_t t = 0; t < tags.size(); ++t) {
        if (boot_col[t] >= 0) {
            TestOutcome o;
            o.method = tags[t];
            o.statistic = ens.observed[static_cast<std::size_t>(boot_col[t])];
            o.pvalue = ens.pvalue(boot_col[t]);
            o.kind = PValueKind::bootstrap;
            o.replicates = ens.B;
            o.seed = plan.master_seed;
            out.push_back(std::move(o));
        } else if (tags[t] == "ES" || tags[t] == "EP") {
            out.push_back(gof_chisq(s, model, opt.grid_nx, opt.grid_ny, tags[t] == "ES" ? BinRule::ES : BinRule::EP));
        } else {
            const auto h = parse_hybrid_tag(tags[t]);
            out.push_back(hybrid_gof(s, model, h->ratio, h->base, opt.B, plan.sub(hash64(tags[t].c_str()))));
        }
    }
    return out;
}

TestOutcome run_gof_single(const ContinuousSample& s, const NullModel& model, const std::string& tag,
                           const GofOptions& opt, const RngPlan& plan) {
    return run_gof(s, model, {tag}, opt, plan)[0];
}

TestOutcome combined_gof(const ContinuousSample& s, const NullModel& model, const std::vector<std::string>& tags,
                         const GofOptions& opt, const RngPlan& plan) {
    if (tags.size() < 2) throw ValidationError("combined test needs at least 2 members");
    std::vector<GofBootFlavor> flavors;
    std::set<std::string> seen;
    for (const auto& t : tags) {
        if (!seen.insert(t).second) throw ValidationError("duplicate method tag \"" + t + "\"");
        const auto f = gof_boot_flavor(t);
        if (!f) throw ValidationError("combined GOF members must be bootstrap statistics, got \"" + t + "\"");
        flavors.push_back(*f);
    }
    const GofBootGroup group = make_gof_group(s, model, flavors, opt, plan);
    const EnsembleResult ens = gof_boot_ensemble(s, model, group, opt, plan);
    return combined_from_ensemble(ens, tags, PValueKind::bootstrap, plan.master_seed);
}

TestOutcome hybrid_gof(const ContinuousSample& s, const NullModel& model, int ratio, const std::string& base_tag,
                       std::int64_t B, const RngPlan& plan) {
    if (ratio != 1 && ratio != 5) throw ValidationError("hybrid ratio must be 1 or 5");
    const auto* info = find_method(base_tag, ProblemKind::TsContinuous);
    if (!info || base_tag == "ES" || base_tag == "EP")
        throw ValidationError("hybrid base must be a permutation two-sample statistic, got \"" + base_tag + "\"");
    s.validate();
    model.require_sampler("hybrid " + base_tag);
    model.require_dim(s.d, "hybrid " + base_tag);
    const NullModel fit = model.fitted(s);
    Rng rng = plan.sub(hash64("hybrid-mc")).stream(0);
    const ContinuousSample y = fit.sample(ratio * s.n, rng);
    TestOutcome o = ts_permutation_test(s, y, base_tag, B, plan.sub(hash64("hybrid-perm")), false);
    o.method = base_tag + "T" + std::to_string(ratio);
    o.seed = plan.master_seed;
    return o;
}

std::vector<TestOutcome> run_gof_discrete(const DiscreteGridSample& s, const ExpectationFn& expectation,
                                          const std::vector<std::string>& tags, std::int64_t B, const RngPlan& plan) {
    if (tags.empty()) throw ValidationError("run_gof_discrete: no method tags");
    std::vector<DiscFlavor> flavors;
    std::set<std::string> seen;
    for (const auto& t : tags) {
        if (!seen.insert(t).second) throw ValidationError("duplicate method tag \"" + t + "\"");
        bool found = false;
        for (DiscFlavor f : {DiscFlavor::KS, DiscFlavor::K, DiscFlavor::CvM, DiscFlavor::AD, DiscFlavor::P,
                             DiscFlavor::TV, DiscFlavor::KL, DiscFlavor::H})
            if (t == disc_tag(f)) {
                flavors.push_back(f);
                found = true;
                break;
            }
        if (!found) throw ValidationError("unknown discrete goodness-of-fit method \"" + t + "\"");
    }
    return discrete_gof_battery(s, expectation, flavors, B, plan);
}

std::vector<TestOutcome> run_twosample(const ContinuousSample& s1, const ContinuousSample& s2,
                                       const std::vector<std::string>& tags, const TsOptions& opt,
                                       const RngPlan& plan) {
    if (tags.empty()) throw ValidationError("run_twosample: no method tags");
    for (const auto& t : tags) {
        const auto* info = find_method(t, ProblemKind::TsContinuous);
        if (!info) throw ValidationError("unknown two-sample method \"" + t + "\"");
        if (s1.d < info->min_dim || (info->max_dim > 0 && s1.d > info->max_dim))
            throw CapabilityError("method " + t + " does not support dimension " + std::to_string(s1.d));
    }
    return ts_battery(s1, s2, tags, opt.B, plan, opt.exhaustive, opt.grid_nx, opt.grid_ny);
}

std::vector<TestOutcome> run_twosample_discrete(const DiscreteGridSample& a, const DiscreteGridSample& b,
                                                const std::vector<std::string>& tags, std::int64_t B,
                                                const RngPlan& plan) {
    if (tags.empty()) throw ValidationError("run_twosample_discrete: no method tags");
    std::vector<DiscTsFlavor> flavors;
    std::set<std::string> seen;
    for (const auto& t : tags) {
        if (!seen.insert(t).second) throw ValidationError("duplicate method tag \"" + t + "\"");
        const auto f = disc_ts_flavor_from_tag(t);
        if (!f) throw ValidationError("unknown discrete two-sample method \"" + t + "\"");
        flavors.push_back(*f);
    }
    return discrete_ts_battery(a, b, flavors, B, plan);
}

}  // namespace mvtest
