#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvtest/rng.hpp"
#include "mvtest/sample.hpp"

namespace mvtest {

// A null hypothesis with optional capabilities. Tests check the
// capabilities they need up front and fail fast with CapabilityError;
// nothing is silently approximated.
struct NullModel {
    std::string id;
    int dim = 0;
    // Number of parameters the estimator fits (Fisher df correction).
    int n_params = 0;
    // Support box; used where the math calls for +-infinity arguments
    // (marginal cdfs, outermost chi-square bins, quantile bisection).
    std::vector<double> lo, hi;

    std::function<double(std::span<const double>)> cdf;
    std::function<double(std::span<const double>)> pdf;
    std::function<ContinuousSample(std::int64_t, Rng&)> sampler;
    std::function<std::vector<double>(const ContinuousSample&)> estimate;
    std::function<NullModel(const std::vector<double>&)> with_params;

    bool has_cdf() const { return static_cast<bool>(cdf); }
    bool has_pdf() const { return static_cast<bool>(pdf); }
    bool has_sampler() const { return static_cast<bool>(sampler); }
    bool has_estimator() const { return static_cast<bool>(estimate) && static_cast<bool>(with_params); }

    void require_cdf(const std::string& who) const;
    void require_pdf(const std::string& who) const;
    void require_sampler(const std::string& who) const;
    void require_dim(int d, const std::string& who) const;

    // With an estimator present returns the refitted model, else *this.
    NullModel fitted(const ContinuousSample& s) const;

    // Marginal cdf of coordinate k: joint cdf with every other coordinate
    // pushed to its upper support bound.
    double marginal_cdf(int k, double x) const;
    // Inverse of marginal_cdf by bisection over [lo[k], hi[k]].
    double marginal_quantile(int k, double p) const;

    ContinuousSample sample(std::int64_t n, Rng& rng) const;
};

// Bivariate Archimedean copulas used by the null families and the case
// studies. theta conventions: Clayton > 0, Frank != 0, Gumbel/Joe >= 1.
namespace copula {

double clayton_cdf(double u, double v, double theta);
double clayton_pdf(double u, double v, double theta);
double clayton_cond_inv(double u, double w, double theta);  // v with C(v|u) = w

double frank_cdf(double u, double v, double theta);
double frank_pdf(double u, double v, double theta);
double frank_cond_inv(double u, double w, double theta);

double gumbel_cdf(double u, double v, double theta);
double gumbel_pdf(double u, double v, double theta);
double gumbel_cond_inv(double u, double w, double theta);  // numeric inversion

double joe_cdf(double u, double v, double theta);
double joe_pdf(double u, double v, double theta);
double joe_cond_inv(double u, double w, double theta);  // numeric inversion

}  // namespace copula

// Null family factories.
NullModel make_uniform(int dim);
NullModel make_normal(int dim);
// Product normal with estimated per-coordinate mean/sd (the one estimation
// exemplar); params laid out (mu_1..mu_d, sd_1..sd_d).
NullModel make_normal_est(int dim);
NullModel make_clayton(double theta);
NullModel make_frank(double theta);
NullModel make_gumbel(double theta);
NullModel make_joe(double theta);
// weight on the Joe component; 1-weight on Frank.
NullModel make_joe_frank_mix(double weight, double theta_joe, double theta_frank);
// Uniform density on the region between two fixed quadratics in the unit
// square (Dalitz-plot style); sampler + pdf only, no closed-form cdf.
NullModel make_dalitz();

namespace dalitz {
double lower_bound(double x);
double upper_bound(double x);
double area();
bool inside(double x, double y);
}  // namespace dalitz

// CLI-facing factory: name in {uniform, normal, normal-est, clayton, frank,
// gumbel, joe, joefrank, dalitz}; params as required by the family.
NullModel make_model(const std::string& name, const std::vector<double>& params, int dim);

}  // namespace mvtest
