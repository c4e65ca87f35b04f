#include "mvtest/case_studies.hpp"

#include <cmath>

#include "mvtest/errors.hpp"

namespace mvtest {

namespace {

// Mixture components for the Joe/Frank case: positive upper-tail
// dependence against negative dependence, so reweighting moves cell mass
// between the two diagonals and largely cancels in the cumulative cdf.
constexpr double kJoeTheta = 1.1;
constexpr double kFrankTheta = 20.0;
constexpr double kPi = 3.14159265358979323846;

// Uniform on the cube tilted toward the main diagonal:
// f(x) = 1 + lambda * prod_k cos(pi x_k), sampled by rejection.
// Every marginal stays exactly uniform for any lambda in [0, 1].
ContinuousSample stripe_sample(std::int64_t n, int d, double lambda, Rng& rng) {
    ContinuousSample s(n, d);
    std::vector<double> x(d);
    for (std::int64_t i = 0; i < n; ++i) {
        for (;;) {
            double p = 1.0;
            for (int k = 0; k < d; ++k) p *= std::cos(kPi * (x[k] = rng.uniform()));
            if (rng.uniform() * (1.0 + lambda) <= 1.0 + lambda * p) break;
        }
        for (int k = 0; k < d; ++k) s.at(i, k) = x[k];
    }
    return s;
}

ContinuousSample copula_conditional_sample(std::int64_t n, double theta,
                                           double (*cond_inv)(double, double, double), Rng& rng) {
    ContinuousSample s(n, 2);
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const double w = rng.uniform();
        s.at(i, 0) = u;
        s.at(i, 1) = cond_inv(u, w, theta);
    }
    return s;
}

// One draw from the Joe/Frank mixture with Joe weight `weight`.
void mix_draw(double weight, double& u, double& v, Rng& rng) {
    u = rng.uniform();
    const double w = rng.uniform();
    if (rng.uniform() < weight)
        v = copula::joe_cond_inv(u, w, kJoeTheta);
    else
        v = copula::frank_cond_inv(u, w, kFrankTheta);
}

double mix_cdf(double u, double v, double weight) {
    return weight * copula::joe_cdf(u, v, kJoeTheta) + (1.0 - weight) * copula::frank_cdf(u, v, kFrankTheta);
}

std::vector<double> grid_5() { return {0.2, 0.4, 0.6, 0.8, 1.0}; }

// Cell probabilities of the mixture on the 5x5 quantized grid by cdf
// inclusion-exclusion.
GridExpectation mix_expectation(double n, double weight) {
    const auto gv = grid_5();
    GridExpectation e;
    e.n = n;
    e.expected.resize(25);
    auto cdf = [&](int i, int j) {  // cumulative up to cell (i,j); -1 = zero
        if (i < 0 || j < 0) return 0.0;
        return mix_cdf(gv[static_cast<std::size_t>(i)], gv[static_cast<std::size_t>(j)], weight);
    };
    for (int j = 0; j < 5; ++j)
        for (int i = 0; i < 5; ++i)
            e.expected[static_cast<std::size_t>(i + 5 * j)] =
                n * (cdf(i, j) - cdf(i - 1, j) - cdf(i, j - 1) + cdf(i - 1, j - 1));
    return e;
}

DiscreteGridSample mix_grid_sample(std::int64_t n, double weight, Rng& rng) {
    DiscreteGridSample s;
    s.valsx = grid_5();
    s.valsy = grid_5();
    s.counts.assign(25, 0);
    for (std::int64_t k = 0; k < n; ++k) {
        double u, v;
        mix_draw(weight, u, v, rng);
        const int i = std::min(4, static_cast<int>(u / 0.2));
        const int j = std::min(4, static_cast<int>(v / 0.2));
        ++s.cell(i, j);
    }
    return s;
}

// Truncated-Gaussian bump inside the Dalitz region by rejection.
void dalitz_bump_draw(double& x, double& y, Rng& rng) {
    constexpr double sigma = 0.03;
    for (int tries = 0; tries < 10000; ++tries) {
        const double bx = 0.5 + sigma * rng.normal();
        const double by = 0.5 + sigma * rng.normal();
        if (dalitz::inside(bx, by)) {
            x = bx;
            y = by;
            return;
        }
    }
    throw NumericError("dalitz bump rejection failed");
}

CaseStudy make_stripe_case(int d) {
    CaseStudy c;
    c.id = d == 2 ? "uniform.uniform-diagonal" : "uniform.uniform-diagonal-" + std::to_string(d);
    c.dim = d;
    c.null_model = make_uniform(d);
    c.alt_sampler = [d](std::int64_t n, double lambda, Rng& rng) { return stripe_sample(n, d, lambda, rng); };
    c.lambda_hi = 1.0;
    c.lambda_default = 0.75;
    return c;
}

CaseStudy make_normal_cor_case(int d) {
    CaseStudy c;
    c.id = d == 2 ? "normal-ind.normal-cor" : "normal-ind.normal-cor-" + std::to_string(d);
    c.dim = d;
    c.null_model = make_normal(d);
    // Equicorrelated alternative: x_k = sqrt(rho) z0 + sqrt(1-rho) z_k has
    // unit variance and pairwise correlation rho for every k.
    c.alt_sampler = [d](std::int64_t n, double rho, Rng& rng) {
        ContinuousSample s(n, d);
        for (std::int64_t i = 0; i < n; ++i) {
            const double z0 = rng.normal();
            for (int k = 0; k < d; ++k) s.at(i, k) = std::sqrt(rho) * z0 + std::sqrt(1.0 - rho) * rng.normal();
        }
        return s;
    };
    c.lambda_hi = 0.95;
    c.lambda_default = 0.5;
    return c;
}

CaseStudy make_copula_case(const std::string& id, double (*cond_inv)(double, double, double),
                           double (*to_theta)(double), double lambda_hi, double lambda_default) {
    CaseStudy c;
    c.id = id;
    c.null_model = make_uniform(2);
    c.alt_sampler = [cond_inv, to_theta](std::int64_t n, double lambda, Rng& rng) {
        if (lambda <= 1e-12) {  // exact independence at the null point
            ContinuousSample s(n, 2);
            for (std::int64_t i = 0; i < n; ++i) {
                s.at(i, 0) = rng.uniform();
                s.at(i, 1) = rng.uniform();
            }
            return s;
        }
        return copula_conditional_sample(n, to_theta(lambda), cond_inv, rng);
    };
    c.lambda_hi = lambda_hi;
    c.lambda_default = lambda_default;
    return c;
}

std::vector<CaseStudy> build_registry() {
    std::vector<CaseStudy> reg;

    reg.push_back(make_stripe_case(2));
    reg.push_back(make_normal_cor_case(2));

    reg.push_back(make_copula_case("uniform.Clayton", &copula::clayton_cond_inv, [](double l) { return l; }, 8.0, 1.0));
    reg.push_back(make_copula_case("uniform.Frank", &copula::frank_cond_inv, [](double l) { return l; }, 25.0, 4.0));
    reg.push_back(
        make_copula_case("uniform.Gumbel", &copula::gumbel_cond_inv, [](double l) { return 1.0 + l; }, 6.0, 0.6));

    {
        CaseStudy c;
        c.id = "normal.normal-shift-one.marginal";
        c.marginals_equal = false;
        c.null_model = make_normal(2);
        c.alt_sampler = [](std::int64_t n, double lambda, Rng& rng) {
            ContinuousSample s(n, 2);
            for (std::int64_t i = 0; i < n; ++i) {
                s.at(i, 0) = rng.normal() + lambda;
                s.at(i, 1) = rng.normal();
            }
            return s;
        };
        c.lambda_hi = 2.0;
        c.lambda_default = 0.4;
        reg.push_back(std::move(c));
    }

    {
        CaseStudy c;
        c.id = "mix.Joe.Frank";
        c.null_model = make_joe_frank_mix(0.5, kJoeTheta, kFrankTheta);
        // lambda shifts the Joe weight from its null value 0.5.
        c.alt_sampler = [](std::int64_t n, double lambda, Rng& rng) {
            ContinuousSample s(n, 2);
            for (std::int64_t i = 0; i < n; ++i) {
                double u, v;
                mix_draw(0.5 + lambda, u, v, rng);
                s.at(i, 0) = u;
                s.at(i, 1) = v;
            }
            return s;
        };
        c.lambda_hi = 0.5;
        c.lambda_default = 0.27;
        c.has_discrete = true;
        c.grid_x = grid_5();
        c.grid_y = grid_5();
        c.disc_expectation = [](double n) { return mix_expectation(n, 0.5); };
        c.disc_sampler = [](std::int64_t n, double lambda, Rng& rng) { return mix_grid_sample(n, 0.5 + lambda, rng); };
        reg.push_back(std::move(c));
    }

    {
        CaseStudy c;
        c.id = "DalitzPDG";
        c.null_model = make_dalitz();
        c.alt_sampler = [](std::int64_t n, double lambda, Rng& rng) {
            const NullModel base = make_dalitz();
            ContinuousSample s(n, 2);
            for (std::int64_t i = 0; i < n; ++i) {
                if (rng.uniform() < lambda) {
                    dalitz_bump_draw(s.at(i, 0), s.at(i, 1), rng);
                } else {
                    const ContinuousSample one = base.sample(1, rng);
                    s.at(i, 0) = one.at(0, 0);
                    s.at(i, 1) = one.at(0, 1);
                }
            }
            return s;
        };
        c.lambda_hi = 0.6;
        c.lambda_default = 0.2;
        reg.push_back(std::move(c));
    }

    reg.push_back(make_stripe_case(5));
    reg.push_back(make_normal_cor_case(5));
    return reg;
}

}  // namespace

const std::vector<CaseStudy>& case_registry() {
    static const std::vector<CaseStudy> reg = build_registry();
    return reg;
}

const CaseStudy* find_case(const std::string& id) {
    for (const auto& c : case_registry())
        if (c.id == id) return &c;
    return nullptr;
}

}  // namespace mvtest
