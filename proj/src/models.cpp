#include "mvtest/model.hpp"

#include <algorithm>
#include <cmath>

#include "mvtest/errors.hpp"
#include "mvtest/specials.hpp"

namespace mvtest {

namespace {

constexpr double kUClip = 1e-12;  // keep copula arguments inside (0,1)

double clamp01(double u) { return std::min(1.0 - kUClip, std::max(kUClip, u)); }

}  // namespace

void NullModel::require_cdf(const std::string& who) const {
    if (!has_cdf()) throw CapabilityError(who + ": model \"" + id + "\" has no cdf");
}
void NullModel::require_pdf(const std::string& who) const {
    if (!has_pdf()) throw CapabilityError(who + ": model \"" + id + "\" has no pdf");
}
void NullModel::require_sampler(const std::string& who) const {
    if (!has_sampler()) throw CapabilityError(who + ": model \"" + id + "\" has no sampler");
}
void NullModel::require_dim(int d, const std::string& who) const {
    if (d != dim)
        throw CapabilityError(who + ": model \"" + id + "\" is " + std::to_string(dim) + "-dimensional, data is " +
                              std::to_string(d) + "-dimensional");
}

NullModel NullModel::fitted(const ContinuousSample& s) const {
    if (!has_estimator()) return *this;
    return with_params(estimate(s));
}

double NullModel::marginal_cdf(int k, double x) const {
    require_cdf("marginal_cdf");
    std::vector<double> pt(hi);
    pt[k] = x;
    return cdf(pt);
}

double NullModel::marginal_quantile(int k, double p) const {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("marginal_quantile: p outside [0,1]");
    double a = lo[k], b = hi[k];
    for (int it = 0; it < 200 && b - a > 1e-13 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        (marginal_cdf(k, m) < p ? a : b) = m;
    }
    return 0.5 * (a + b);
}

ContinuousSample NullModel::sample(std::int64_t n, Rng& rng) const {
    require_sampler("sample");
    return sampler(n, rng);
}

// ---------------------------------------------------------------------------
// copulas

namespace copula {

double clayton_cdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    return std::pow(std::pow(u, -theta) + std::pow(v, -theta) - 1.0, -1.0 / theta);
}

double clayton_pdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double s = std::pow(u, -theta) + std::pow(v, -theta) - 1.0;
    return (1.0 + theta) * std::pow(u * v, -theta - 1.0) * std::pow(s, -1.0 / theta - 2.0);
}

double clayton_cond_inv(double u, double w, double theta) {
    u = clamp01(u);
    w = clamp01(w);
    const double t = (std::pow(w, -theta / (1.0 + theta)) - 1.0) * std::pow(u, -theta) + 1.0;
    return std::pow(t, -1.0 / theta);
}

double frank_cdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double num = std::expm1(-theta * u) * std::expm1(-theta * v);
    return -std::log1p(num / std::expm1(-theta)) / theta;
}

double frank_pdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double em = -std::expm1(-theta);  // 1 - e^-theta
    const double a = -std::expm1(-theta * u);
    const double b = -std::expm1(-theta * v);
    const double den = em - a * b;
    return theta * em * std::exp(-theta * (u + v)) / (den * den);
}

double frank_cond_inv(double u, double w, double theta) {
    u = clamp01(u);
    w = clamp01(w);
    const double eu = std::exp(-theta * u);
    // C(v|u) = eu (ev-1) / ((e-1) + (eu-1)(ev-1)) = w, solved for ev.
    const double ev = 1.0 + w * std::expm1(-theta) / (eu - w * (eu - 1.0));
    return clamp01(-std::log(ev) / theta);
}

double gumbel_cdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double a = -std::log(u), b = -std::log(v);
    return std::exp(-std::pow(std::pow(a, theta) + std::pow(b, theta), 1.0 / theta));
}

double gumbel_pdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double a = -std::log(u), b = -std::log(v);
    const double s = std::pow(a, theta) + std::pow(b, theta);
    const double big_a = std::pow(s, 1.0 / theta);
    return std::exp(-big_a) * std::pow(a * b, theta - 1.0) / (u * v) * std::pow(s, 1.0 / theta - 2.0) *
           (big_a + theta - 1.0);
}

namespace {

// Conditional cdf C(v | u) = dC/du for the two families without a
// closed-form inverse; both are increasing in v.
double gumbel_cond(double u, double v, double theta) {
    const double a = -std::log(u), b = -std::log(v);
    const double s = std::pow(a, theta) + std::pow(b, theta);
    return gumbel_cdf(u, v, theta) * std::pow(s, 1.0 / theta - 1.0) * std::pow(a, theta - 1.0) / u;
}

double joe_cond(double u, double v, double theta) {
    const double x = std::pow(1.0 - u, theta), y = std::pow(1.0 - v, theta);
    const double t = x + y - x * y;
    return std::pow(t, 1.0 / theta - 1.0) * std::pow(1.0 - u, theta - 1.0) * (1.0 - y);
}

template <class Cond>
double invert_cond(double u, double w, double theta, Cond&& cond) {
    double a = kUClip, b = 1.0 - kUClip;
    for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        (cond(u, m, theta) < w ? a : b) = m;
    }
    return 0.5 * (a + b);
}

}  // namespace

double gumbel_cond_inv(double u, double w, double theta) {
    u = clamp01(u);
    w = clamp01(w);
    return invert_cond(u, w, theta, gumbel_cond);
}

double joe_cdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double x = std::pow(1.0 - u, theta), y = std::pow(1.0 - v, theta);
    return 1.0 - std::pow(x + y - x * y, 1.0 / theta);
}

double joe_pdf(double u, double v, double theta) {
    u = clamp01(u);
    v = clamp01(v);
    const double x = std::pow(1.0 - u, theta), y = std::pow(1.0 - v, theta);
    const double t = x + y - x * y;
    return std::pow(t, 1.0 / theta - 2.0) * std::pow((1.0 - u) * (1.0 - v), theta - 1.0) *
           (theta * t + (theta - 1.0) * (1.0 - x) * (1.0 - y));
}

double joe_cond_inv(double u, double w, double theta) {
    u = clamp01(u);
    w = clamp01(w);
    return invert_cond(u, w, theta, joe_cond);
}

}  // namespace copula

// ---------------------------------------------------------------------------
// families

NullModel make_uniform(int dim) {
    if (dim < 1) throw ValidationError("make_uniform: dim must be positive");
    NullModel m;
    m.id = "uniform";
    m.dim = dim;
    m.lo.assign(dim, 0.0);
    m.hi.assign(dim, 1.0);
    m.cdf = [](std::span<const double> x) {
        double p = 1.0;
        for (double v : x) p *= std::clamp(v, 0.0, 1.0);
        return p;
    };
    m.pdf = [](std::span<const double> x) {
        for (double v : x)
            if (v < 0.0 || v > 1.0) return 0.0;
        return 1.0;
    };
    m.sampler = [dim](std::int64_t n, Rng& rng) {
        ContinuousSample s(n, dim);
        for (auto& v : s.data) v = rng.uniform();
        return s;
    };
    return m;
}

namespace {

NullModel make_normal_with(const std::vector<double>& mu, const std::vector<double>& sd, int n_params) {
    const int dim = static_cast<int>(mu.size());
    NullModel m;
    m.id = n_params ? "normal-est" : "normal";
    m.dim = dim;
    m.n_params = n_params;
    m.lo.resize(dim);
    m.hi.resize(dim);
    for (int k = 0; k < dim; ++k) {
        m.lo[k] = mu[k] - 10.0 * sd[k];
        m.hi[k] = mu[k] + 10.0 * sd[k];
    }
    m.cdf = [mu, sd](std::span<const double> x) {
        double p = 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) p *= normal_cdf((x[k] - mu[k]) / sd[k]);
        return p;
    };
    m.pdf = [mu, sd](std::span<const double> x) {
        double p = 1.0;
        for (std::size_t k = 0; k < x.size(); ++k) p *= normal_pdf((x[k] - mu[k]) / sd[k]) / sd[k];
        return p;
    };
    m.sampler = [mu, sd, dim](std::int64_t n, Rng& rng) {
        ContinuousSample s(n, dim);
        for (std::int64_t i = 0; i < n; ++i)
            for (int k = 0; k < dim; ++k) s.at(i, k) = mu[k] + sd[k] * rng.normal();
        return s;
    };
    return m;
}

}  // namespace

NullModel make_normal(int dim) {
    if (dim < 1) throw ValidationError("make_normal: dim must be positive");
    return make_normal_with(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), 0);
}

NullModel make_normal_est(int dim) {
    if (dim < 1) throw ValidationError("make_normal_est: dim must be positive");
    NullModel m = make_normal_with(std::vector<double>(dim, 0.0), std::vector<double>(dim, 1.0), 2 * dim);
    m.estimate = [dim](const ContinuousSample& s) {
        s.validate();
        std::vector<double> params(2 * dim);
        for (int k = 0; k < dim; ++k) {
            double mean = 0.0;
            for (std::int64_t i = 0; i < s.n; ++i) mean += s.at(i, k);
            mean /= static_cast<double>(s.n);
            double ss = 0.0;
            for (std::int64_t i = 0; i < s.n; ++i) {
                const double e = s.at(i, k) - mean;
                ss += e * e;
            }
            const double sd = std::sqrt(ss / static_cast<double>(s.n - 1));
            if (!(sd > 0.0)) throw NumericError("normal-est: degenerate coordinate " + std::to_string(k));
            params[k] = mean;
            params[dim + k] = sd;
        }
        return params;
    };
    m.with_params = [dim](const std::vector<double>& p) {
        NullModel f = make_normal_est(dim);
        std::vector<double> mu(p.begin(), p.begin() + dim), sd(p.begin() + dim, p.end());
        NullModel base = make_normal_with(mu, sd, 2 * dim);
        f.lo = base.lo;
        f.hi = base.hi;
        f.cdf = base.cdf;
        f.pdf = base.pdf;
        f.sampler = base.sampler;
        return f;
    };
    return m;
}

namespace {

// Shared scaffolding for the bivariate copula nulls: uniform marginals on
// [0,1]^2, sampling by the conditional-distribution method.
template <class Cdf, class Pdf, class CondInv>
NullModel make_copula_model(const std::string& id, double theta, Cdf cdf2, Pdf pdf2, CondInv cinv) {
    NullModel m;
    m.id = id;
    m.dim = 2;
    m.lo = {0.0, 0.0};
    m.hi = {1.0, 1.0};
    m.cdf = [cdf2, theta](std::span<const double> x) {
        const double u = std::clamp(x[0], 0.0, 1.0), v = std::clamp(x[1], 0.0, 1.0);
        if (u <= 0.0 || v <= 0.0) return 0.0;
        if (u >= 1.0) return v;
        if (v >= 1.0) return u;
        return cdf2(u, v, theta);
    };
    m.pdf = [pdf2, theta](std::span<const double> x) {
        if (x[0] < 0.0 || x[0] > 1.0 || x[1] < 0.0 || x[1] > 1.0) return 0.0;
        return pdf2(x[0], x[1], theta);
    };
    m.sampler = [cinv, theta](std::int64_t n, Rng& rng) {
        ContinuousSample s(n, 2);
        for (std::int64_t i = 0; i < n; ++i) {
            const double u = rng.uniform();
            const double w = rng.uniform();
            s.at(i, 0) = u;
            s.at(i, 1) = cinv(u, w, theta);
        }
        return s;
    };
    return m;
}

}  // namespace

NullModel make_clayton(double theta) {
    if (!(theta > 0.0)) throw ValidationError("make_clayton: theta must be positive");
    return make_copula_model("clayton", theta, copula::clayton_cdf, copula::clayton_pdf, copula::clayton_cond_inv);
}

NullModel make_frank(double theta) {
    if (theta == 0.0) throw ValidationError("make_frank: theta must be nonzero");
    return make_copula_model("frank", theta, copula::frank_cdf, copula::frank_pdf, copula::frank_cond_inv);
}

NullModel make_gumbel(double theta) {
    if (!(theta >= 1.0)) throw ValidationError("make_gumbel: theta must be >= 1");
    return make_copula_model("gumbel", theta, copula::gumbel_cdf, copula::gumbel_pdf, copula::gumbel_cond_inv);
}

NullModel make_joe(double theta) {
    if (!(theta >= 1.0)) throw ValidationError("make_joe: theta must be >= 1");
    return make_copula_model("joe", theta, copula::joe_cdf, copula::joe_pdf, copula::joe_cond_inv);
}

NullModel make_joe_frank_mix(double weight, double theta_joe, double theta_frank) {
    if (!(weight >= 0.0 && weight <= 1.0)) throw ValidationError("make_joe_frank_mix: weight outside [0,1]");
    NullModel joe = make_joe(theta_joe);
    NullModel frank = make_frank(theta_frank);
    NullModel m;
    m.id = "joefrank";
    m.dim = 2;
    m.lo = {0.0, 0.0};
    m.hi = {1.0, 1.0};
    m.cdf = [=](std::span<const double> x) { return weight * joe.cdf(x) + (1.0 - weight) * frank.cdf(x); };
    m.pdf = [=](std::span<const double> x) { return weight * joe.pdf(x) + (1.0 - weight) * frank.pdf(x); };
    m.sampler = [=](std::int64_t n, Rng& rng) {
        ContinuousSample s(n, 2);
        for (std::int64_t i = 0; i < n; ++i) {
            const bool pick_joe = rng.uniform() < weight;
            const double u = rng.uniform(), w = rng.uniform();
            s.at(i, 0) = u;
            s.at(i, 1) = pick_joe ? copula::joe_cond_inv(u, w, theta_joe) : copula::frank_cond_inv(u, w, theta_frank);
        }
        return s;
    };
    return m;
}

// ---------------------------------------------------------------------------
// Dalitz-style region

namespace dalitz {

double lower_bound(double x) { return 0.10 + 0.50 * (x - 0.5) * (x - 0.5); }
double upper_bound(double x) { return 0.90 - 0.80 * (x - 0.5) * (x - 0.5); }

double area() {
    // integral over [0,1] of (upper - lower) = 0.8 - 1.3*(x-0.5)^2
    return 0.8 - 1.3 / 12.0;
}

bool inside(double x, double y) {
    return x >= 0.0 && x <= 1.0 && y >= lower_bound(x) && y <= upper_bound(x);
}

}  // namespace dalitz

NullModel make_dalitz() {
    NullModel m;
    m.id = "dalitz";
    m.dim = 2;
    m.lo = {0.0, 0.0};
    m.hi = {1.0, 1.0};
    const double inv_area = 1.0 / dalitz::area();
    m.pdf = [inv_area](std::span<const double> x) { return dalitz::inside(x[0], x[1]) ? inv_area : 0.0; };
    m.sampler = [](std::int64_t n, Rng& rng) {
        ContinuousSample s(n, 2);
        for (std::int64_t i = 0; i < n; ++i) {
            double x, y;
            do {
                x = rng.uniform();
                y = rng.uniform();
            } while (!dalitz::inside(x, y));
            s.at(i, 0) = x;
            s.at(i, 1) = y;
        }
        return s;
    };
    return m;
}

NullModel make_model(const std::string& name, const std::vector<double>& params, int dim) {
    auto want = [&](std::size_t k) {
        if (params.size() != k)
            throw ValidationError("model " + name + " expects " + std::to_string(k) + " parameter(s), got " +
                                  std::to_string(params.size()));
    };
    if (name == "uniform") {
        want(0);
        return make_uniform(dim);
    }
    if (name == "normal") {
        want(0);
        return make_normal(dim);
    }
    if (name == "normal-est") {
        want(0);
        return make_normal_est(dim);
    }
    if (name == "clayton") {
        want(1);
        return make_clayton(params[0]);
    }
    if (name == "frank") {
        want(1);
        return make_frank(params[0]);
    }
    if (name == "gumbel") {
        want(1);
        return make_gumbel(params[0]);
    }
    if (name == "joe") {
        want(1);
        return make_joe(params[0]);
    }
    if (name == "joefrank") {
        want(3);
        return make_joe_frank_mix(params[0], params[1], params[2]);
    }
    if (name == "dalitz") {
        want(0);
        return make_dalitz();
    }
    throw ValidationError("unknown model \"" + name + "\"");
}

}  // namespace mvtest
