#include "mvtest/density_gof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

#include "mvtest/errors.hpp"
#include "mvtest/kernels.hpp"

namespace mvtest {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double ball_volume(int d, double r) {
    // pi^(d/2) r^d / Gamma(d/2 + 1)
    return std::pow(std::acos(-1.0), 0.5 * d) * std::pow(r, d) / std::tgamma(0.5 * d + 1.0);
}

// Quasi-uniform disc points (sunflower spiral), shared by every d=2 ball;
// the per-ball substream only rotates the set.
const std::vector<double>& disc_points(int m) {
    thread_local std::vector<double> pts;
    thread_local int cached = -1;
    if (cached != m) {
        pts.resize(static_cast<std::size_t>(m) * 2);
        constexpr double golden_frac = 0.61803398874989484820;
        for (int t = 0; t < m; ++t) {
            const double r = std::sqrt((t + 0.5) / m);
            const double a = kTwoPi * std::fmod(t * golden_frac, 1.0);
            pts[static_cast<std::size_t>(t) * 2] = r * std::cos(a);
            pts[static_cast<std::size_t>(t) * 2 + 1] = r * std::sin(a);
        }
        cached = m;
    }
    return pts;
}

}  // namespace

BBTransform bb_transform(const ContinuousSample& s, const NullModel& model, const BBOptions& opts,
                         std::uint64_t seed) {
    s.validate();
    model.require_pdf("bb_transform");
    model.require_dim(s.d, "bb_transform");
    if (opts.mc_points < 16) throw ValidationError("bb_transform: too few integration points");

    const std::int64_t n = s.n;
    const int d = s.d;
    BBTransform out;
    out.radii.resize(static_cast<std::size_t>(n));
    out.u.resize(static_cast<std::size_t>(n));

    // nearest-neighbor distances, O(n^2) without materializing the matrix
#pragma omp parallel for schedule(static) if (omp_get_level() == 0 && n > 64)
    for (std::int64_t i = 0; i < n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        const double* ri = s.data.data() + static_cast<std::size_t>(i) * d;
        for (std::int64_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double* rj = s.data.data() + static_cast<std::size_t>(j) * d;
            double acc = 0.0;
            for (int k = 0; k < d; ++k) {
                const double e = ri[k] - rj[k];
                acc += e * e;
            }
            best = std::min(best, acc);
        }
        out.radii[static_cast<std::size_t>(i)] = std::sqrt(best);
    }

    const RngPlan ball_plan{seed};
    bool dup = false;
#pragma omp parallel for schedule(static) reduction(|| : dup) if (omp_get_level() == 0 && n > 16)
    for (std::int64_t j = 0; j < n; ++j) {
        const double r = out.radii[static_cast<std::size_t>(j)];
        if (!(r > 0.0)) {
            out.u[static_cast<std::size_t>(j)] = 1.0;
            dup = true;
            continue;
        }
        Rng rng = ball_plan.stream(static_cast<std::uint64_t>(j));
        const double* c = s.data.data() + static_cast<std::size_t>(j) * d;
        double mean_pdf = 0.0;
        std::vector<double> pt(static_cast<std::size_t>(d));
        if (d == 2) {
            const auto& qp = disc_points(opts.mc_points);
            const double rot = rng.uniform(0.0, kTwoPi);
            const double cr = std::cos(rot), sr = std::sin(rot);
            for (int t = 0; t < opts.mc_points; ++t) {
                const double px = qp[static_cast<std::size_t>(t) * 2], py = qp[static_cast<std::size_t>(t) * 2 + 1];
                pt[0] = c[0] + r * (cr * px - sr * py);
                pt[1] = c[1] + r * (sr * px + cr * py);
                mean_pdf += model.pdf(pt);
            }
        } else {
            for (int t = 0; t < opts.mc_points; ++t) {
                // uniform in the d-ball: normal direction, radius ~ R u^(1/d)
                double norm = 0.0;
                for (int k = 0; k < d; ++k) {
                    pt[static_cast<std::size_t>(k)] = rng.normal();
                    norm += pt[static_cast<std::size_t>(k)] * pt[static_cast<std::size_t>(k)];
                }
                norm = std::sqrt(norm);
                const double rad = r * std::pow(rng.uniform(), 1.0 / d);
                for (int k = 0; k < d; ++k) pt[static_cast<std::size_t>(k)] = c[k] + rad * pt[static_cast<std::size_t>(k)] / norm;
                mean_pdf += model.pdf(pt);
            }
        }
        mean_pdf /= static_cast<double>(opts.mc_points);
        const double integral = ball_volume(d, r) * mean_pdf;
        out.u[static_cast<std::size_t>(j)] = std::exp(-static_cast<double>(n) * integral);
    }
    out.had_duplicates = dup;
    return out;
}

double uniform_ks_stat(std::vector<double> u) {
    std::sort(u.begin(), u.end());
    const double n = static_cast<double>(u.size());
    double stat = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - u[i];
        const double lo = u[i] - static_cast<double>(i) / n;
        stat = std::max({stat, hi, lo});
    }
    return stat;
}

TestOutcome bb_test(const ContinuousSample& s, const NullModel& model, const BBOptions& opts, std::int64_t B,
                    const RngPlan& plan, double poisson_rate) {
    // One fixed ball-seed base for the observed sample and every replicate:
    // the statistic is then a single deterministic function of the sample,
    // which is exactly what bootstrap calibration assumes.
    const std::uint64_t ball_seed = plan.sub(hash64("bb-balls")).master_seed;
    const auto eval = [&opts, ball_seed](const ContinuousSample& rep, const NullModel& m, std::span<double> out) {
        out[0] = uniform_ks_stat(bb_transform(rep, m, opts, ball_seed).u);
    };
    const auto ens = bootstrap_ensemble(s, model, 1, eval, B, plan.sub(hash64("bb-boot")), poisson_rate);
    TestOutcome out;
    out.method = "BB";
    out.statistic = ens.observed[0];
    out.pvalue = ens.pvalue(0);
    out.kind = PValueKind::bootstrap;
    out.replicates = B;
    out.seed = plan.master_seed;
    return out;
}

std::vector<double> silverman_bandwidths(const ContinuousSample& s) {
    const int d = s.d;
    const double factor = std::pow(4.0 / ((d + 2.0) * static_cast<double>(s.n)), 1.0 / (d + 4.0));
    std::vector<double> h(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) mean += s.at(i, k);
        mean /= static_cast<double>(s.n);
        double ss = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) {
            const double e = s.at(i, k) - mean;
            ss += e * e;
        }
        const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
        if (!(sd > 0.0)) throw NumericError("silverman_bandwidths: degenerate coordinate " + std::to_string(k));
        h[static_cast<std::size_t>(k)] = sd * factor;
    }
    return h;
}

double br_stat(const ContinuousSample& s, const NullModel& model) {
    s.validate();
    model.require_pdf("br_stat");
    model.require_dim(s.d, "br_stat");
    const auto h = silverman_bandwidths(s);
    const std::int64_t n = s.n;
    const int d = s.d;
    double kern_norm = 1.0;
    for (int k = 0; k < d; ++k) kern_norm /= h[static_cast<std::size_t>(k)] * std::sqrt(kTwoPi);

    const double sum = det_block_sum(n, [&](std::int64_t j) {
        const double* rj = s.data.data() + static_cast<std::size_t>(j) * d;
        double fhat = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double* ri = s.data.data() + static_cast<std::size_t>(i) * d;
            double q = 0.0;
            for (int k = 0; k < d; ++k) {
                const double e = (rj[k] - ri[k]) / h[static_cast<std::size_t>(k)];
                q += e * e;
            }
            fhat += std::exp(-0.5 * q);
        }
        fhat *= kern_norm / static_cast<double>(n);
        const double e = fhat - model.pdf(s.row(j));
        return e * e;
    });
    return sum / static_cast<double>(n);
}

TestOutcome br_test(const ContinuousSample& s, const NullModel& model, std::int64_t B, const RngPlan& plan,
                    double poisson_rate) {
    const auto eval = [](const ContinuousSample& rep, const NullModel& m, std::span<double> out) {
        out[0] = br_stat(rep, m);
    };
    const auto ens = bootstrap_ensemble(s, model, 1, eval, B, plan, poisson_rate);
    TestOutcome out;
    out.method = "BR";
    out.statistic = ens.observed[0];
    out.pvalue = ens.pvalue(0);
    out.kind = PValueKind::bootstrap;
    out.replicates = B;
    out.seed = plan.master_seed;
    return out;
}

}  // namespace mvtest
