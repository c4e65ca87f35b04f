#include "mvtest/rng.hpp"

#include <cmath>
#include <string>

#include "mvtest/errors.hpp"

namespace mvtest {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix64(std::uint64_t& x) {
    x += kGolden;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Order-free combination of a seed and a tag (splitmix64 of the xor-fold).
std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (b + kGolden + (a << 6) + (a >> 2));
    return splitmix64(x);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& w : s_) w = splitmix64(x);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    if (n == 0) throw ValidationError("uniform_int: n must be positive");
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do {
        x = next();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_normal_;
    }
    // 1-uniform() lies in (0,1], keeping the log argument positive.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    cached_normal_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

std::int64_t Rng::poisson(double rate) {
    if (!(rate > 0.0)) throw ValidationError("poisson: rate must be positive");
    // exp(-rate) underflows near 700; split by additivity to stay exact.
    if (rate > 600.0) return poisson(rate / 2.0) + poisson(rate / 2.0);
    const double u = uniform();
    double p = std::exp(-rate);
    double cum = p;
    std::int64_t k = 0;
    while (u >= cum) {
        ++k;
        p *= rate / static_cast<double>(k);
        cum += p;
        if (k > 10000000) break;  // numerically unreachable guard
    }
    return k;
}

Rng RngPlan::stream(std::uint64_t index) const { return Rng(mix(master_seed, index)); }

RngPlan RngPlan::sub(std::uint64_t tag) const {
    // Offset keeps sub-plan space disjoint from the stream space.
    return RngPlan{mix(master_seed ^ 0xA5A5A5A5A5A5A5A5ull, tag)};
}

std::uint64_t hash64(const std::string& s) {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

std::vector<std::uint8_t> sample_mask(std::uint64_t n, std::uint64_t m, Rng& rng) {
    if (m > n) throw ValidationError("sample_mask: m exceeds n");
    std::vector<std::uint32_t> idx(n);
    for (std::uint64_t i = 0; i < n; ++i) idx[i] = static_cast<std::uint32_t>(i);
    for (std::uint64_t i = 0; i < m; ++i) {
        const std::uint64_t j = i + rng.uniform_int(n - i);
        std::swap(idx[i], idx[j]);
    }
    std::vector<std::uint8_t> mask(n, 0);
    for (std::uint64_t i = 0; i < m; ++i) mask[idx[i]] = 1;
    return mask;
}

}  // namespace mvtest
