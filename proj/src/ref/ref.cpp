#include "mvtest/ref.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mvtest/errors.hpp"

namespace mvtest::ref {

namespace {

double dist(const ContinuousSample& s, std::int64_t i, std::int64_t j) {
    double acc = 0.0;
    for (int k = 0; k < s.d; ++k) {
        const double e = s.at(i, k) - s.at(j, k);
        acc += e * e;
    }
    return std::sqrt(acc);
}

bool dominates(const ContinuousSample& s, std::int64_t i, std::int64_t j) {  // row j <= row i
    for (int k = 0; k < s.d; ++k)
        if (s.at(j, k) > s.at(i, k)) return false;
    return true;
}

ContinuousSample pool2(const ContinuousSample& x, const ContinuousSample& y) {
    ContinuousSample p(x.n + y.n, x.d);
    std::copy(x.data.begin(), x.data.end(), p.data.begin());
    std::copy(y.data.begin(), y.data.end(), p.data.begin() + static_cast<std::ptrdiff_t>(x.data.size()));
    return p;
}

struct EdfTriple {
    double f1, f2, h;
};

// EDF values of both samples and the pooled sample at pooled point i.
EdfTriple edf_at(const ContinuousSample& x, const ContinuousSample& y, const ContinuousSample& p, std::int64_t i) {
    std::int64_t c1 = 0, c2 = 0;
    for (std::int64_t j = 0; j < p.n; ++j) {
        if (!dominates(p, i, j)) continue;
        (j < x.n ? c1 : c2) += 1;
    }
    return {static_cast<double>(c1) / static_cast<double>(x.n), static_cast<double>(c2) / static_cast<double>(y.n),
            static_cast<double>(c1 + c2) / static_cast<double>(p.n)};
}

}  // namespace

std::vector<double> pairwise_distances(const ContinuousSample& s) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(s.n) * (s.n - 1) / 2);
    for (std::int64_t i = 0; i < s.n; ++i)
        for (std::int64_t j = i + 1; j < s.n; ++j) out.push_back(dist(s, i, j));
    return out;
}

std::vector<std::int64_t> dominance_counts(const ContinuousSample& s) {
    std::vector<std::int64_t> out(static_cast<std::size_t>(s.n));
    for (std::int64_t i = 0; i < s.n; ++i) {
        std::int64_t c = 0;
        for (std::int64_t j = 0; j < s.n; ++j) c += dominates(s, i, j);
        out[static_cast<std::size_t>(i)] = c;
    }
    return out;
}

std::vector<std::int32_t> knn_indices(const ContinuousSample& s, int k) {
    std::vector<std::int32_t> out(static_cast<std::size_t>(s.n) * k);
    for (std::int64_t i = 0; i < s.n; ++i) {
        std::vector<std::pair<double, std::int32_t>> cand;
        for (std::int64_t j = 0; j < s.n; ++j)
            if (j != i) cand.emplace_back(dist(s, i, j), static_cast<std::int32_t>(j));
        std::sort(cand.begin(), cand.end());
        for (int t = 0; t < k; ++t) out[static_cast<std::size_t>(i) * k + t] = cand[static_cast<std::size_t>(t)].second;
    }
    return out;
}

std::vector<std::pair<std::int32_t, std::int32_t>> minimum_spanning_tree(const ContinuousSample& s) {
    // Kruskal with union-find; edge order (weight, min, max).
    struct E {
        double w;
        std::int32_t a, b;
        bool operator<(const E& o) const { return std::tie(w, a, b) < std::tie(o.w, o.a, o.b); }
    };
    std::vector<E> all;
    for (std::int64_t i = 0; i < s.n; ++i)
        for (std::int64_t j = i + 1; j < s.n; ++j)
            all.push_back({dist(s, i, j), static_cast<std::int32_t>(i), static_cast<std::int32_t>(j)});
    std::sort(all.begin(), all.end());
    std::vector<std::int32_t> parent(static_cast<std::size_t>(s.n));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::int32_t(std::int32_t)> find = [&](std::int32_t v) {
        while (parent[static_cast<std::size_t>(v)] != v) v = parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        return v;
    };
    std::vector<std::pair<std::int32_t, std::int32_t>> edges;
    for (const auto& e : all) {
        const auto ra = find(e.a), rb = find(e.b);
        if (ra == rb) continue;
        parent[static_cast<std::size_t>(ra)] = rb;
        edges.emplace_back(e.a, e.b);
        if (edges.size() + 1 == static_cast<std::size_t>(s.n)) break;
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

std::vector<std::pair<std::int32_t, std::int32_t>> minimum_spanning_tree_bruteforce(const ContinuousSample& s) {
    const int n = static_cast<int>(s.n);
    if (n < 2 || n > 7) throw ValidationError("bruteforce MST: need 2 <= N <= 7");
    if (n == 2) return {{0, 1}};
    // Every labeled tree corresponds to one Pruefer sequence of length n-2.
    const int len = n - 2;
    std::vector<int> seq(static_cast<std::size_t>(len), 0);
    double best_w = std::numeric_limits<double>::infinity();
    std::vector<std::pair<std::int32_t, std::int32_t>> best;
    while (true) {
        std::vector<int> degree(static_cast<std::size_t>(n), 1);
        for (int v : seq) ++degree[static_cast<std::size_t>(v)];
        std::vector<int> deg = degree;
        std::vector<std::pair<std::int32_t, std::int32_t>> edges;
        double w = 0.0;
        for (int v : seq) {
            int leaf = -1;
            for (int u = 0; u < n; ++u)
                if (deg[static_cast<std::size_t>(u)] == 1) {
                    leaf = u;
                    break;
                }
            edges.emplace_back(std::min(leaf, v), std::max(leaf, v));
            w += dist(s, leaf, v);
            --deg[static_cast<std::size_t>(leaf)];
            --deg[static_cast<std::size_t>(v)];
        }
        int u1 = -1, u2 = -1;
        for (int u = 0; u < n; ++u)
            if (deg[static_cast<std::size_t>(u)] == 1) (u1 < 0 ? u1 : u2) = u;
        edges.emplace_back(std::min(u1, u2), std::max(u1, u2));
        w += dist(s, u1, u2);
        if (w < best_w) {
            best_w = w;
            std::sort(edges.begin(), edges.end());
            best = edges;
        }
        int pos = len - 1;
        while (pos >= 0 && seq[static_cast<std::size_t>(pos)] == n - 1) seq[static_cast<std::size_t>(pos--)] = 0;
        if (pos < 0) break;
        ++seq[static_cast<std::size_t>(pos)];
    }
    return best;
}

namespace {

std::vector<std::pair<double, double>> gof_pairs(const ContinuousSample& s,
                                                 const std::function<double(std::span<const double>)>& cdf) {
    std::vector<std::pair<double, double>> out;
    for (std::int64_t i = 0; i < s.n; ++i) {
        std::int64_t c = 0;
        for (std::int64_t j = 0; j < s.n; ++j) c += dominates(s, i, j);
        out.emplace_back(cdf(s.row(i)), static_cast<double>(c) / static_cast<double>(s.n));
    }
    return out;
}

}  // namespace

double qks(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf) {
    double m = 0.0;
    for (const auto& [f, fh] : gof_pairs(s, cdf)) m = std::max(m, std::abs(f - fh));
    return m;
}

double qk(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf) {
    double up = 0.0, down = 0.0;
    for (const auto& [f, fh] : gof_pairs(s, cdf)) {
        up = std::max(up, f - fh);
        down = std::max(down, fh - f);
    }
    return up + down;
}

double qcvm(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf) {
    double acc = 0.0;
    for (const auto& [f, fh] : gof_pairs(s, cdf)) acc += (f - fh) * (f - fh);
    return acc;
}

double qad(const ContinuousSample& s, const std::function<double(std::span<const double>)>& cdf) {
    double acc = 0.0;
    for (const auto& [f, fh] : gof_pairs(s, cdf)) {
        const double fc = std::min(1.0 - 1e-10, std::max(1e-10, f));
        acc += (f - fh) * (f - fh) / (fc * (1.0 - fc));
    }
    return acc;
}

double ts_ks(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    double m = 0.0;
    for (std::int64_t i = 0; i < p.n; ++i) {
        const auto e = edf_at(x, y, p, i);
        m = std::max(m, std::abs(e.f1 - e.f2));
    }
    return m;
}

double ts_k(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    double up = 0.0, down = 0.0;
    for (std::int64_t i = 0; i < p.n; ++i) {
        const auto e = edf_at(x, y, p, i);
        up = std::max(up, e.f1 - e.f2);
        down = std::max(down, e.f2 - e.f1);
    }
    return std::max(up, 0.0) + std::max(down, 0.0);
}

double ts_cvm(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    double acc = 0.0;
    for (std::int64_t i = 0; i < p.n; ++i) {
        const auto e = edf_at(x, y, p, i);
        acc += (e.f1 - e.f2) * (e.f1 - e.f2);
    }
    return acc;
}

double ts_ad(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    double acc = 0.0;
    for (std::int64_t i = 0; i < p.n; ++i) {
        const auto e = edf_at(x, y, p, i);
        if (e.h > 0.0 && e.h < 1.0) acc += (e.f1 - e.f2) * (e.f1 - e.f2) / (e.h * (1.0 - e.h));
    }
    return acc;
}

double ts_nn_fraction(const ContinuousSample& x, const ContinuousSample& y, int k) {
    const auto p = pool2(x, y);
    const auto nn = knn_indices(p, k);
    double acc0 = 0.0, acc1 = 0.0;
    for (std::int64_t i = 0; i < p.n; ++i) {
        const bool in_x = i < x.n;
        int same = 0;
        for (int t = 0; t < k; ++t) {
            const std::int64_t j = nn[static_cast<std::size_t>(i) * k + t];
            same += (j < x.n) == in_x;
        }
        (in_x ? acc0 : acc1) += static_cast<double>(same) / k;
    }
    return acc0 / static_cast<double>(x.n) + acc1 / static_cast<double>(y.n);
}

namespace {

// Ordered-pair class sums of a transform of the pairwise distance.
struct ClassSums {
    double xx = 0, yy = 0, xy = 0;
};

ClassSums class_sums(const ContinuousSample& x, const ContinuousSample& y, double (*f)(double)) {
    const auto p = pool2(x, y);
    ClassSums s;
    for (std::int64_t i = 0; i < p.n; ++i)
        for (std::int64_t j = i + 1; j < p.n; ++j) {
            const double v = f(dist(p, i, j));
            const bool ix = i < x.n, jx = j < x.n;
            if (ix && jx)
                s.xx += v;
            else if (!ix && !jx)
                s.yy += v;
            else
                s.xy += v;
        }
    return s;
}

double guarded_log(double d) { return std::log(std::max(d, 1e-300)); }
double root(double d) { return std::sqrt(d); }

}  // namespace

double ts_az(const ContinuousSample& x, const ContinuousSample& y) {
    const auto s = class_sums(x, y, &guarded_log);
    const double n = static_cast<double>(x.n), m = static_cast<double>(y.n);
    return s.xy / (n * m) - s.xx / (n * n) - s.yy / (m * m);
}

double ts_bf(const ContinuousSample& x, const ContinuousSample& y) {
    const auto s = class_sums(x, y, &root);
    const double n = static_cast<double>(x.n), m = static_cast<double>(y.n);
    return n * m / (n + m) * (s.xy / (n * m) - s.xx / (n * n) - s.yy / (m * m));
}

double ts_bf_paper(const ContinuousSample& x, const ContinuousSample& y) {
    const auto s = class_sums(x, y, &root);
    const double n = static_cast<double>(x.n), m = static_cast<double>(y.n);
    return n * m / (n + m) * (s.xy / (n * m) + s.xx / (n * n) - s.yy / (m * m));
}

double ts_bg(const ContinuousSample& x, const ContinuousSample& y) {
    const auto s = class_sums(x, y, &root);
    const double n = static_cast<double>(x.n), m = static_cast<double>(y.n);
    const double bxy = s.xy / (n * m);
    const double bxx = 2.0 * s.xx / (n * (n - 1.0));
    const double byy = 2.0 * s.yy / (m * (m - 1.0));
    return (bxx - bxy) * (bxx - bxy) + (byy - bxy) * (byy - bxy);
}

std::vector<double> ts_mmd(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    std::vector<double> all;
    for (std::int64_t i = 0; i < p.n; ++i)
        for (std::int64_t j = i + 1; j < p.n; ++j) all.push_back(dist(p, i, j));
    std::sort(all.begin(), all.end());
    const double median =
        all.size() % 2 ? all[all.size() / 2] : 0.5 * (all[all.size() / 2 - 1] + all[all.size() / 2]);
    const double n = static_cast<double>(x.n), m = static_cast<double>(y.n);
    std::vector<double> out;
    for (int e = -4; e <= 5; ++e) {
        const double h = median * std::pow(2.0, e);
        double kxx = 0.0, kyy = 0.0, kxy = 0.0;
        for (std::int64_t i = 0; i < p.n; ++i)
            for (std::int64_t j = i + 1; j < p.n; ++j) {
                const double r = dist(p, i, j);
                const double v = std::exp(-r * r / (2.0 * h * h));
                const bool ix = i < x.n, jx = j < x.n;
                if (ix && jx)
                    kxx += v;
                else if (!ix && !jx)
                    kyy += v;
                else
                    kxy += v;
            }
        out.push_back(2.0 * kxx / (n * (n - 1.0)) + 2.0 * kyy / (m * (m - 1.0)) - 2.0 * kxy / (n * m));
    }
    return out;
}

double ts_fr(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    const auto edges = minimum_spanning_tree(p);
    std::int64_t R = 0;
    std::vector<int> degv(static_cast<std::size_t>(p.n), 0);
    for (const auto& [a, b] : edges) {
        R += (a < x.n) != (b < x.n);
        ++degv[static_cast<std::size_t>(a)];
        ++degv[static_cast<std::size_t>(b)];
    }
    double C = 0.0;
    for (int dg : degv) C += 0.5 * dg * (dg - 1);
    const double N = static_cast<double>(p.n), n = static_cast<double>(x.n), m = static_cast<double>(y.n);
    const double e = static_cast<double>(edges.size());
    const double p1 = 2.0 * n * m / (N * (N - 1.0));
    const double p2 = n * m / (N * (N - 1.0));
    const double mu = e * p1;
    double second = e * p1 + 2.0 * C * p2;
    const double disjoint = e * (e - 1.0) - 2.0 * C;
    if (disjoint > 0.0)
        second += disjoint * 4.0 * n * (n - 1.0) * m * (m - 1.0) / (N * (N - 1.0) * (N - 2.0) * (N - 3.0));
    return (mu - static_cast<double>(R)) / std::sqrt(second - mu * mu);
}

std::int64_t ts_nn0(const ContinuousSample& x, const ContinuousSample& y) {
    const auto p = pool2(x, y);
    std::int64_t count = 0;
    for (std::int64_t i = 0; i < x.n; ++i) {
        double best = std::numeric_limits<double>::infinity();
        std::int64_t pick = -1;
        for (std::int64_t j = 0; j < p.n; ++j) {
            if (j == i) continue;
            const double w = dist(p, i, j);
            if (w < best) {
                best = w;
                pick = j;
            }
        }
        count += pick < x.n;
    }
    return count;
}

double kde_distance(const ContinuousSample& s, const std::function<double(std::span<const double>)>& pdf) {
    const int d = s.d;
    const double n = static_cast<double>(s.n);
    const double factor = std::pow(4.0 / ((d + 2.0) * n), 1.0 / (d + 4.0));
    std::vector<double> h(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        double mean = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) mean += s.at(i, k);
        mean /= n;
        double ss = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) ss += (s.at(i, k) - mean) * (s.at(i, k) - mean);
        h[static_cast<std::size_t>(k)] = std::sqrt(ss / (n - 1.0)) * factor;
    }
    double norm = 1.0;
    for (int k = 0; k < d; ++k) norm /= h[static_cast<std::size_t>(k)] * std::sqrt(2.0 * std::acos(-1.0));
    double acc = 0.0;
    for (std::int64_t j = 0; j < s.n; ++j) {
        double fhat = 0.0;
        for (std::int64_t i = 0; i < s.n; ++i) {
            double q = 0.0;
            for (int k = 0; k < d; ++k) {
                const double e = (s.at(j, k) - s.at(i, k)) / h[static_cast<std::size_t>(k)];
                q += e * e;
            }
            fhat += std::exp(-0.5 * q);
        }
        fhat *= norm / n;
        const double e = fhat - pdf(s.row(j));
        acc += e * e;
    }
    return acc / n;
}

}  // namespace mvtest::ref
