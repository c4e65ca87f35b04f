#include "mvtest/rosenblatt.hpp"

#include <algorithm>
#include <cmath>

#include "mvtest/edf_gof.hpp"
#include "mvtest/errors.hpp"
#include "mvtest/kernels.hpp"

namespace mvtest {

ContinuousSample rosenblatt_2d(const ContinuousSample& s, const NullModel& model) {
    s.validate();
    model.require_cdf("rosenblatt_2d");
    model.require_dim(2, "rosenblatt_2d");
    if (s.d != 2) throw CapabilityError("rosenblatt_2d: data must be bivariate");

    ContinuousSample out(s.n, 2);
    const double y_top = model.hi[1];
    for (std::int64_t i = 0; i < s.n; ++i) {
        const double x1 = s.at(i, 0), x2 = s.at(i, 1);
        const double h = std::max(1e-5, 1e-5 * std::abs(x1));
        const double lo1 = x1 - h, hi1 = x1 + h;
        auto F = [&](double a, double b) {
            const double pt[2] = {a, b};
            return model.cdf(std::span<const double>(pt, 2));
        };
        const double num = F(hi1, x2) - F(lo1, x2);
        const double den = F(hi1, y_top) - F(lo1, y_top);
        if (!(den > 0.0))
            throw NumericError("rosenblatt_2d: vanishing marginal density near x1 = " + std::to_string(x1));
        out.at(i, 0) = std::clamp(F(x1, y_top), 0.0, 1.0);
        out.at(i, 1) = std::clamp(num / den, 0.0, 1.0);
    }
    return out;
}

namespace {

// Independence copula on the unit square; the reference model after a
// Rosenblatt transform.
const NullModel& unit_independence() {
    static const NullModel m = make_uniform(2);
    return m;
}

}  // namespace

double ff_stat(const ContinuousSample& s, const NullModel& model) {
    return qks_stat(edf_pairs(rosenblatt_2d(s, model), unit_independence()));
}

TestOutcome ff_test(const ContinuousSample& s, const NullModel& model, std::int64_t B, const RngPlan& plan,
                    double poisson_rate) {
    const auto eval = [](const ContinuousSample& rep, const NullModel& m, std::span<double> out) {
        out[0] = ff_stat(rep, m);
    };
    const auto ens = bootstrap_ensemble(s, model, 1, eval, B, plan, poisson_rate);
    TestOutcome out;
    out.method = "FF";
    out.statistic = ens.observed[0];
    out.pvalue = ens.pvalue(0);
    out.kind = PValueKind::bootstrap;
    out.replicates = B;
    out.seed = plan.master_seed;
    return out;
}

std::vector<double> default_rk_radii() {
    std::vector<double> r(20);
    for (int k = 1; k <= 20; ++k) r[static_cast<std::size_t>(k - 1)] = 0.25 * k / 20.0;
    return r;
}

std::vector<double> ripley_khat(const ContinuousSample& unit_pts, const std::vector<double>& radii) {
    if (radii.empty()) throw ValidationError("ripley_khat: empty radius grid");
    const std::int64_t n = unit_pts.n;
    // sorted pairwise distances once, then one binary search per radius
    std::vector<double> dist;
    dist.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    for (std::int64_t i = 0; i < n; ++i)
        for (std::int64_t j = i + 1; j < n; ++j) {
            const double dx = unit_pts.at(i, 0) - unit_pts.at(j, 0);
            const double dy = unit_pts.at(i, 1) - unit_pts.at(j, 1);
            dist.push_back(std::sqrt(dx * dx + dy * dy));
        }
    std::sort(dist.begin(), dist.end());
    std::vector<double> khat(radii.size());
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
    for (std::size_t k = 0; k < radii.size(); ++k) {
        // strict inequality: pairs closer than r
        const auto c = std::lower_bound(dist.begin(), dist.end(), radii[k]) - dist.begin();
        khat[k] = 2.0 * static_cast<double>(c) * scale;
    }
    return khat;
}

double ripley_k_stat(const ContinuousSample& s, const NullModel& model, const std::vector<double>& radii) {
    const ContinuousSample u = rosenblatt_2d(s, model);
    const auto khat = ripley_khat(u, radii);
    const double pi = std::acos(-1.0);
    double acc = 0.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
        const double e = khat[k] - pi * radii[k] * radii[k];
        acc += e * e;
    }
    return acc / static_cast<double>(radii.size());
}

TestOutcome ripley_k_test(const ContinuousSample& s, const NullModel& model, const std::vector<double>& radii,
                          std::int64_t B, const RngPlan& plan, double poisson_rate) {
    const auto eval = [&radii](const ContinuousSample& rep, const NullModel& m, std::span<double> out) {
        out[0] = ripley_k_stat(rep, m, radii);
    };
    const auto ens = bootstrap_ensemble(s, model, 1, eval, B, plan, poisson_rate);
    TestOutcome out;
    out.method = "RK";
    out.statistic = ens.observed[0];
    out.pvalue = ens.pvalue(0);
    out.kind = PValueKind::bootstrap;
    out.replicates = B;
    out.seed = plan.master_seed;
    return out;
}

}  // namespace mvtest
