#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace mvtest {

// Deterministic random generator (xoshiro256++ seeded through splitmix64).
// All samplers below are written out explicitly instead of relying on
// <random> distributions, whose output is implementation-defined; results
// must be bit-identical across platforms, runs and thread counts.
class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    std::uint64_t operator()() { return next(); }

    static constexpr std::uint64_t min() { return 0; }
    static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

    // Uniform on [0,1) with 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer on [0, n), n > 0, rejection-debiased.
    std::uint64_t uniform_int(std::uint64_t n);
    // Standard normal via Box-Muller (second value cached).
    double normal();
    // Exact Poisson by cdf inversion; large rates split recursively.
    std::int64_t poisson(double rate);

  private:
    std::array<std::uint64_t, 4> s_;
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

// Counter-based stream derivation: stream(i) depends only on (master_seed, i),
// never on draw order, so parallel consumers can claim streams by index.
struct RngPlan {
    std::uint64_t master_seed = 0;

    Rng stream(std::uint64_t index) const;
    // Derived plan for a nested scope (per case, per method, ...).
    RngPlan sub(std::uint64_t tag) const;
};

// FNV-1a, used to turn string identifiers into stream tags.
std::uint64_t hash64(const std::string& s);

// Draw a size-m subset of {0..n-1} by partial Fisher-Yates; returns a
// 0/1 membership mask of length n (1 = selected).
std::vector<std::uint8_t> sample_mask(std::uint64_t n, std::uint64_t m, Rng& rng);

}  // namespace mvtest
