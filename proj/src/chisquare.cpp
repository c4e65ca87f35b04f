#include "mvtest/chisquare.hpp"

#include <algorithm>
#include <cmath>

#include "mvtest/errors.hpp"
#include "mvtest/specials.hpp"

namespace mvtest {

namespace {

void check_bins(int nx, int ny) {
    if (nx < 2 || ny < 2) throw ValidationError("chi-square grid needs at least 2 bins per axis");
}

std::vector<double> es_edges(double lo, double hi, int nbins) {
    if (!(hi > lo)) throw ValidationError("degenerate marginal range, cannot build equal-size bins");
    std::vector<double> e(static_cast<std::size_t>(nbins - 1));
    for (int k = 1; k < nbins; ++k)
        e[static_cast<std::size_t>(k - 1)] = lo + (hi - lo) * static_cast<double>(k) / nbins;
    return e;
}

// Strictly increasing edge list; duplicate quantiles (heavy ties in the
// data) collapse, which only means fewer bins before merging.
std::vector<double> dedupe(std::vector<double> e) {
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    return e;
}

}  // namespace

Grid2D make_grid_es(const ContinuousSample& s, int nx, int ny) {
    check_bins(nx, ny);
    s.validate();
    if (s.d != 2) throw CapabilityError("chi-square binning is bivariate, data is " + std::to_string(s.d) + "-dimensional");
    double lox = s.at(0, 0), hix = lox, loy = s.at(0, 1), hiy = loy;
    for (std::int64_t i = 1; i < s.n; ++i) {
        lox = std::min(lox, s.at(i, 0));
        hix = std::max(hix, s.at(i, 0));
        loy = std::min(loy, s.at(i, 1));
        hiy = std::max(hiy, s.at(i, 1));
    }
    Grid2D g;
    g.ex = es_edges(lox, hix, nx);
    g.ey = es_edges(loy, hiy, ny);
    g.nx = nx;
    g.ny = ny;
    return g;
}

Grid2D make_grid_ep_model(const NullModel& m, int nx, int ny) {
    check_bins(nx, ny);
    m.require_cdf("make_grid_ep_model");
    if (m.dim != 2) throw CapabilityError("chi-square binning is bivariate");
    Grid2D g;
    for (int k = 1; k < nx; ++k) g.ex.push_back(m.marginal_quantile(0, static_cast<double>(k) / nx));
    for (int k = 1; k < ny; ++k) g.ey.push_back(m.marginal_quantile(1, static_cast<double>(k) / ny));
    g.ex = dedupe(std::move(g.ex));
    g.ey = dedupe(std::move(g.ey));
    g.nx = static_cast<int>(g.ex.size()) + 1;
    g.ny = static_cast<int>(g.ey.size()) + 1;
    return g;
}

Grid2D make_grid_ep_pooled(const ContinuousSample& pooled, int nx, int ny) {
    check_bins(nx, ny);
    pooled.validate();
    if (pooled.d != 2) throw CapabilityError("chi-square binning is bivariate");
    Grid2D g;
    for (int axis = 0; axis < 2; ++axis) {
        std::vector<double> v(static_cast<std::size_t>(pooled.n));
        for (std::int64_t i = 0; i < pooled.n; ++i) v[static_cast<std::size_t>(i)] = pooled.at(i, axis);
        std::sort(v.begin(), v.end());
        if (!(v.front() < v.back())) throw ValidationError("degenerate marginal range, cannot build quantile bins");
        const int nb = axis == 0 ? nx : ny;
        std::vector<double> e;
        for (int k = 1; k < nb; ++k) {
            // nearest-rank quantile at level k/nb
            const auto r = static_cast<std::size_t>(std::ceil(static_cast<double>(k) * pooled.n / nb)) - 1;
            e.push_back(v[std::min(r, v.size() - 1)]);
        }
        (axis == 0 ? g.ex : g.ey) = dedupe(std::move(e));
    }
    g.nx = static_cast<int>(g.ex.size()) + 1;
    g.ny = static_cast<int>(g.ey.size()) + 1;
    return g;
}

int grid_cell(const Grid2D& g, double x, double y) {
    const auto ix = std::upper_bound(g.ex.begin(), g.ex.end(), x) - g.ex.begin();
    const auto iy = std::upper_bound(g.ey.begin(), g.ey.end(), y) - g.ey.begin();
    return static_cast<int>(ix) + g.nx * static_cast<int>(iy);
}

std::vector<double> BinTable::merged_expected() const {
    std::vector<double> out(static_cast<std::size_t>(n_groups), 0.0);
    for (std::size_t c = 0; c < expected.size(); ++c) out[static_cast<std::size_t>(group[c])] += expected[c];
    return out;
}

std::vector<std::int64_t> BinTable::merged_observed() const {
    std::vector<std::int64_t> out(static_cast<std::size_t>(n_groups), 0);
    for (std::size_t c = 0; c < observed.size(); ++c) out[static_cast<std::size_t>(group[c])] += observed[c];
    return out;
}

std::vector<std::int64_t> BinTable::merged_observed2() const {
    std::vector<std::int64_t> out(static_cast<std::size_t>(n_groups), 0);
    for (std::size_t c = 0; c < observed2.size(); ++c) out[static_cast<std::size_t>(group[c])] += observed2[c];
    return out;
}

BinTable bin_gof(const ContinuousSample& s, const NullModel& model, const Grid2D& g) {
    model.require_cdf("bin_gof");
    model.require_dim(2, "bin_gof");
    const std::size_t cells = static_cast<std::size_t>(g.nx) * g.ny;
    BinTable t;
    t.nx = g.nx;
    t.ny = g.ny;
    t.observed.assign(cells, 0);
    for (std::int64_t i = 0; i < s.n; ++i) ++t.observed[static_cast<std::size_t>(grid_cell(g, s.at(i, 0), s.at(i, 1)))];

    // Rectangle probabilities from cdf differences; outer edges sit at the
    // support bounds so the outermost bins absorb the tails.
    std::vector<double> ex(1, model.lo[0]);
    ex.insert(ex.end(), g.ex.begin(), g.ex.end());
    ex.push_back(model.hi[0]);
    std::vector<double> ey(1, model.lo[1]);
    ey.insert(ey.end(), g.ey.begin(), g.ey.end());
    ey.push_back(model.hi[1]);
    std::vector<double> F(ex.size() * ey.size());
    for (std::size_t a = 0; a < ex.size(); ++a)
        for (std::size_t b = 0; b < ey.size(); ++b) {
            const double pt[2] = {ex[a], ey[b]};
            F[a + ex.size() * b] = model.cdf(std::span<const double>(pt, 2));
        }
    t.expected.assign(cells, 0.0);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t a = static_cast<std::size_t>(i), b = static_cast<std::size_t>(j);
            const double p = F[(a + 1) + ex.size() * (b + 1)] - F[a + ex.size() * (b + 1)] -
                             F[(a + 1) + ex.size() * b] + F[a + ex.size() * b];
            t.expected[static_cast<std::size_t>(i + g.nx * j)] = std::max(0.0, p) * static_cast<double>(s.n);
        }
    t.group.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) t.group[c] = static_cast<int>(c);
    t.n_groups = static_cast<int>(cells);
    return t;
}

BinTable bin_twosample(const ContinuousSample& s1, const ContinuousSample& s2, const Grid2D& g) {
    if (s1.d != 2 || s2.d != 2) throw CapabilityError("two-sample chi-square is bivariate");
    const std::size_t cells = static_cast<std::size_t>(g.nx) * g.ny;
    BinTable t;
    t.nx = g.nx;
    t.ny = g.ny;
    t.observed.assign(cells, 0);
    t.observed2.assign(cells, 0);
    for (std::int64_t i = 0; i < s1.n; ++i) ++t.observed[static_cast<std::size_t>(grid_cell(g, s1.at(i, 0), s1.at(i, 1)))];
    for (std::int64_t i = 0; i < s2.n; ++i) ++t.observed2[static_cast<std::size_t>(grid_cell(g, s2.at(i, 0), s2.at(i, 1)))];
    t.group.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) t.group[c] = static_cast<int>(c);
    t.n_groups = static_cast<int>(cells);
    return t;
}

void merge_low_bins(BinTable& t, double threshold) {
    const int cells = t.nx * t.ny;

    for (;;) {
        // Rebuild merged-bin list: anchor = smallest cell index of the group.
        std::vector<int> anchor(static_cast<std::size_t>(t.n_groups), cells);
        std::vector<double> value(static_cast<std::size_t>(t.n_groups), 0.0);
        for (int c = 0; c < cells; ++c) {
            const auto gidx = static_cast<std::size_t>(t.group[static_cast<std::size_t>(c)]);
            anchor[gidx] = std::min(anchor[gidx], c);
            value[gidx] += t.twosample() ? static_cast<double>(t.observed[static_cast<std::size_t>(c)] +
                                                               t.observed2[static_cast<std::size_t>(c)])
                                         : t.expected[static_cast<std::size_t>(c)];
        }
        std::vector<int> order(static_cast<std::size_t>(t.n_groups));
        for (int i = 0; i < t.n_groups; ++i) order[static_cast<std::size_t>(i)] = i;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return anchor[static_cast<std::size_t>(a)] < anchor[static_cast<std::size_t>(b)]; });

        int deficient_pos = -1;
        for (int pos = 0; pos < t.n_groups; ++pos)
            if (value[static_cast<std::size_t>(order[static_cast<std::size_t>(pos)])] < threshold) {
                deficient_pos = pos;
                break;
            }
        if (deficient_pos < 0) break;
        if (t.n_groups < 2) throw ValidationError("cannot merge bins: total count below the threshold");

        const int g = order[static_cast<std::size_t>(deficient_pos)];
        int partner;
        if (deficient_pos + 1 < t.n_groups &&
            anchor[static_cast<std::size_t>(order[static_cast<std::size_t>(deficient_pos + 1)])] / t.nx ==
                anchor[static_cast<std::size_t>(g)] / t.nx)
            partner = order[static_cast<std::size_t>(deficient_pos + 1)];  // right neighbor in the same row
        else if (deficient_pos > 0)
            partner = order[static_cast<std::size_t>(deficient_pos - 1)];
        else
            partner = order[static_cast<std::size_t>(deficient_pos + 1)];

        // Relabel and compact group ids.
        for (auto& gr : t.group)
            if (gr == g) gr = partner;
        std::vector<int> remap(static_cast<std::size_t>(t.n_groups), -1);
        int next = 0;
        for (int c = 0; c < cells; ++c) {
            auto& gr = t.group[static_cast<std::size_t>(c)];
            if (remap[static_cast<std::size_t>(gr)] < 0) remap[static_cast<std::size_t>(gr)] = next++;
            gr = remap[static_cast<std::size_t>(gr)];
        }
        t.n_groups = next;
    }
}

double chisq_gof_stat(const BinTable& t) {
    const auto O = t.merged_observed();
    const auto E = t.merged_expected();
    double s = 0.0;
    for (std::size_t k = 0; k < O.size(); ++k) {
        if (!(E[k] > 0.0)) throw NumericError("chi-square bin with zero expected count after merging");
        const double e = static_cast<double>(O[k]) - E[k];
        s += e * e / E[k];
    }
    return s;
}

double chisq_ts_stat(const BinTable& t) {
    const auto O1 = t.merged_observed();
    const auto O2 = t.merged_observed2();
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t k = 0; k < O1.size(); ++k) {
        n1 += static_cast<double>(O1[k]);
        n2 += static_cast<double>(O2[k]);
    }
    const double N = n1 + n2;
    double s = 0.0;
    for (std::size_t k = 0; k < O1.size(); ++k) {
        const double z = static_cast<double>(O1[k] + O2[k]);
        if (!(z > 0.0)) throw NumericError("two-sample chi-square bin with zero pooled count after merging");
        const double e1 = n1 * z / N, e2 = n2 * z / N;
        const double d1 = static_cast<double>(O1[k]) - e1, d2 = static_cast<double>(O2[k]) - e2;
        s += d1 * d1 / e1 + d2 * d2 / e2;
    }
    return s;
}

std::string chisq_method_tag(BinRule rule) { return rule == BinRule::ES ? "ES" : "EP"; }

TestOutcome gof_chisq(const ContinuousSample& s, const NullModel& model, int nx, int ny, BinRule rule) {
    s.validate();
    model.require_cdf("gof_chisq");
    model.require_dim(s.d, "gof_chisq");
    if (s.d != 2) throw CapabilityError("gof_chisq: chi-square tests are bivariate");
    const NullModel fitted = model.fitted(s);
    const Grid2D g = rule == BinRule::ES ? make_grid_es(s, nx, ny) : make_grid_ep_model(fitted, nx, ny);
    BinTable t = bin_gof(s, fitted, g);
    merge_low_bins(t);
    const double stat = chisq_gof_stat(t);
    const double df = static_cast<double>(t.n_groups - 1 - fitted.n_params);
    if (!(df > 0.0)) throw ValidationError("gof_chisq: nonpositive degrees of freedom after merging");
    TestOutcome out;
    out.method = chisq_method_tag(rule);
    out.statistic = stat;
    out.pvalue = chisq_sf(stat, df);
    out.kind = PValueKind::asymptotic;
    out.replicates = 0;
    return out;
}

TestOutcome twosample_chisq(const ContinuousSample& s1, const ContinuousSample& s2, int nx, int ny, BinRule rule) {
    const auto [pool, split] = pooled(s1, s2);
    (void)split;
    const Grid2D g = rule == BinRule::ES ? make_grid_es(pool, nx, ny) : make_grid_ep_pooled(pool, nx, ny);
    BinTable t = bin_twosample(s1, s2, g);
    merge_low_bins(t);
    const double stat = chisq_ts_stat(t);
    const double df = static_cast<double>(t.n_groups - 1);
    if (!(df > 0.0)) throw ValidationError("twosample_chisq: nonpositive degrees of freedom after merging");
    TestOutcome out;
    out.method = chisq_method_tag(rule);
    out.statistic = stat;
    out.pvalue = chisq_sf(stat, df);
    out.kind = PValueKind::asymptotic;
    out.replicates = 0;
    return out;
}

}  // namespace mvtest
