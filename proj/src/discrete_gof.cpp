#include "mvtest/discrete_gof.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

#include "mvtest/errors.hpp"

namespace mvtest {

namespace {

// Cumulative sums over the rectangle i' <= i, j' <= j of an x-fastest grid.
std::vector<double> cumulate(const std::vector<double>& v, int gx, int gy) {
    std::vector<double> c(v.size());
    for (int j = 0; j < gy; ++j)
        for (int i = 0; i < gx; ++i) {
            double acc = v[static_cast<std::size_t>(i + gx * j)];
            if (i > 0) acc += c[static_cast<std::size_t>(i - 1 + gx * j)];
            if (j > 0) acc += c[static_cast<std::size_t>(i + gx * (j - 1))];
            if (i > 0 && j > 0) acc -= c[static_cast<std::size_t>(i - 1 + gx * (j - 1))];
            c[static_cast<std::size_t>(i + gx * j)] = acc;
        }
    return c;
}

void check_shapes(const DiscreteGridSample& s, const GridExpectation& e) {
    if (e.expected.size() != s.counts.size())
        throw ValidationError("expectation grid shape does not match the sample grid");
    if (!(e.n > 0.0)) throw ValidationError("expectation total must be positive");
}

}  // namespace

GridCdfs grid_cdfs(const DiscreteGridSample& s, const GridExpectation& e) {
    s.validate();
    check_shapes(s, e);
    const int gx = s.gx(), gy = s.gy();
    std::vector<double> obs(s.counts.size()), exp(e.expected.size());
    const double n_obs = static_cast<double>(s.total());
    for (std::size_t c = 0; c < obs.size(); ++c) obs[c] = static_cast<double>(s.counts[c]) / n_obs;
    for (std::size_t c = 0; c < exp.size(); ++c) exp[c] = e.expected[c] / e.n;
    GridCdfs out;
    out.fhat = cumulate(obs, gx, gy);
    out.f = cumulate(exp, gx, gy);
    return out;
}

const char* disc_tag(DiscFlavor f) {
    switch (f) {
        case DiscFlavor::KS: return "KS";
        case DiscFlavor::K: return "K";
        case DiscFlavor::CvM: return "CvM";
        case DiscFlavor::AD: return "AD";
        case DiscFlavor::P: return "P";
        case DiscFlavor::TV: return "TV";
        case DiscFlavor::KL: return "KL";
        case DiscFlavor::H: return "H";
    }
    return "?";
}

double disc_stat(DiscFlavor f, const DiscreteGridSample& s, const GridExpectation& e) {
    check_shapes(s, e);
    switch (f) {
        case DiscFlavor::KS:
        case DiscFlavor::K:
        case DiscFlavor::CvM:
        case DiscFlavor::AD: {
            const GridCdfs c = grid_cdfs(s, e);
            if (f == DiscFlavor::KS) {
                double m = 0.0;
                for (std::size_t k = 0; k < c.f.size(); ++k) m = std::max(m, std::abs(c.f[k] - c.fhat[k]));
                return m;
            }
            if (f == DiscFlavor::K) {
                double up = 0.0, down = 0.0;
                for (std::size_t k = 0; k < c.f.size(); ++k) {
                    up = std::max(up, c.f[k] - c.fhat[k]);
                    down = std::max(down, c.fhat[k] - c.f[k]);
                }
                return up + down;
            }
            if (f == DiscFlavor::CvM) {
                double acc = 0.0;
                for (std::size_t k = 0; k < c.f.size(); ++k) {
                    const double d = c.f[k] - c.fhat[k];
                    acc += d * d;
                }
                return acc;
            }
            // AD: weight F(1-F); cells with F at 0 or 1 carry no information
            // (the small tolerance only guards cumulative rounding).
            double acc = 0.0;
            for (std::size_t k = 0; k < c.f.size(); ++k) {
                const double F = c.f[k];
                if (F <= 1e-12 || F >= 1.0 - 1e-12) continue;
                const double d = c.f[k] - c.fhat[k];
                acc += d * d / (F * (1.0 - F));
            }
            return acc;
        }
        case DiscFlavor::P: {
            const double scale = static_cast<double>(s.total()) / e.n;
            double acc = 0.0;
            for (std::size_t c = 0; c < s.counts.size(); ++c) {
                const double E = e.expected[c] * scale;
                const double O = static_cast<double>(s.counts[c]);
                if (!(E > 0.0)) {
                    if (O > 0.0) throw NumericError("Pearson statistic with a zero expected count");
                    continue;
                }
                const double d = O - E;
                acc += d * d / E;
            }
            return acc;
        }
        case DiscFlavor::TV: {
            const double n = static_cast<double>(s.total());
            const double scale = n / e.n;
            double acc = 0.0;
            for (std::size_t c = 0; c < s.counts.size(); ++c) {
                const double d = static_cast<double>(s.counts[c]) - e.expected[c] * scale;
                acc += d * d;
            }
            return acc / (n * n);
        }
        case DiscFlavor::KL: {
            const double n = static_cast<double>(s.total());
            const double scale = n / e.n;
            double acc = 0.0;
            for (std::size_t c = 0; c < s.counts.size(); ++c) {
                const double O = static_cast<double>(s.counts[c]);
                if (O <= 0.0) continue;  // 0 log 0 = 0
                const double E = e.expected[c] * scale;
                if (!(E > 0.0)) throw NumericError("divergence statistic with a zero expected count");
                acc += O * std::log(O / E);
            }
            return acc / n;
        }
        case DiscFlavor::H: {
            const double n = static_cast<double>(s.total());
            const double scale = n / e.n;
            double acc = 0.0;
            for (std::size_t c = 0; c < s.counts.size(); ++c) {
                const double d = std::sqrt(static_cast<double>(s.counts[c])) - std::sqrt(e.expected[c] * scale);
                acc += d * d;
            }
            return acc / n;
        }
    }
    throw ValidationError("disc_stat: bad flavor");
}

GridExpectation fixed_expectation(const GridExpectation& e, const DiscreteGridSample&) { return e; }

std::vector<std::int64_t> multinomial_draw(std::int64_t n, const std::vector<double>& weights, Rng& rng) {
    double total = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw ValidationError("multinomial_draw: negative weight");
        total += w;
    }
    if (!(total > 0.0)) throw ValidationError("multinomial_draw: zero total weight");
    std::vector<std::int64_t> out(weights.size(), 0);
    for (std::int64_t t = 0; t < n; ++t) {
        const double u = rng.uniform() * total;
        double cum = 0.0;
        std::size_t pick = weights.size() - 1;
        for (std::size_t c = 0; c < weights.size(); ++c) {
            cum += weights[c];
            if (u < cum) {
                pick = c;
                break;
            }
        }
        ++out[pick];
    }
    return out;
}

std::vector<TestOutcome> discrete_gof_battery(const DiscreteGridSample& s, const ExpectationFn& expectation,
                                              const std::vector<DiscFlavor>& flavors, std::int64_t B,
                                              const RngPlan& plan) {
    s.validate();
    if (B < 1) throw ValidationError("discrete_gof_battery: B must be positive");
    const GridExpectation e_obs = expectation(s);
    check_shapes(s, e_obs);
    const std::int64_t n = s.total();
    const int K = static_cast<int>(flavors.size());

    std::vector<double> observed(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) observed[static_cast<std::size_t>(k)] = disc_stat(flavors[static_cast<std::size_t>(k)], s, e_obs);

    std::vector<double> reps(static_cast<std::size_t>(B) * K);
#pragma omp parallel for schedule(dynamic, 8) if (omp_get_level() == 0 && B > 1)
    for (std::int64_t b = 0; b < B; ++b) {
        Rng rng = plan.stream(static_cast<std::uint64_t>(b));
        DiscreteGridSample rep = s;
        rep.counts = multinomial_draw(n, e_obs.expected, rng);
        const GridExpectation e_rep = expectation(rep);
        for (int k = 0; k < K; ++k)
            reps[static_cast<std::size_t>(b) * K + k] = disc_stat(flavors[static_cast<std::size_t>(k)], rep, e_rep);
    }

    std::vector<TestOutcome> out(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        std::int64_t c = 0;
        for (std::int64_t b = 0; b < B; ++b) c += reps[static_cast<std::size_t>(b) * K + k] >= observed[static_cast<std::size_t>(k)];
        auto& o = out[static_cast<std::size_t>(k)];
        o.method = disc_tag(flavors[static_cast<std::size_t>(k)]);
        o.statistic = observed[static_cast<std::size_t>(k)];
        o.pvalue = add_one_pvalue(c, B);
        o.kind = PValueKind::bootstrap;
        o.replicates = B;
        o.seed = plan.master_seed;
    }
    return out;
}

TestOutcome discrete_gof_test(const DiscreteGridSample& s, const ExpectationFn& expectation, DiscFlavor flavor,
                              std::int64_t B, const RngPlan& plan) {
    return discrete_gof_battery(s, expectation, {flavor}, B, plan)[0];
}

}  // namespace mvtest
