#include "mvtest/sample.hpp"

#include <cmath>

#include "mvtest/errors.hpp"

namespace mvtest {

void ContinuousSample::validate() const {
    if (n < 2) throw ValidationError("sample needs at least 2 rows, got " + std::to_string(n));
    if (d < 1) throw ValidationError("sample needs at least 1 column");
    if (data.size() != static_cast<std::size_t>(n) * d) throw ValidationError("sample storage size mismatch");
    for (double v : data)
        if (!std::isfinite(v)) throw ValidationError("sample contains a non-finite value");
}

std::int64_t DiscreteGridSample::total() const {
    std::int64_t t = 0;
    for (auto c : counts) t += c;
    return t;
}

void DiscreteGridSample::validate() const {
    if (valsx.empty() || valsy.empty()) throw ValidationError("discrete grid needs at least one value per axis");
    for (std::size_t i = 1; i < valsx.size(); ++i)
        if (!(valsx[i - 1] < valsx[i])) throw ValidationError("grid x values must be strictly increasing");
    for (std::size_t j = 1; j < valsy.size(); ++j)
        if (!(valsy[j - 1] < valsy[j])) throw ValidationError("grid y values must be strictly increasing");
    if (counts.size() != valsx.size() * valsy.size())
        throw ValidationError("grid counts must cover the full gx*gy rectangle");
    for (auto c : counts)
        if (c < 0) throw ValidationError("grid counts must be nonnegative");
    if (total() < 1) throw ValidationError("grid has no observations");
}

std::string to_string(PValueKind k) {
    switch (k) {
        case PValueKind::asymptotic: return "asymptotic";
        case PValueKind::permutation: return "permutation";
        case PValueKind::bootstrap: return "bootstrap";
    }
    return "unknown";
}

std::pair<ContinuousSample, LabelSplit> pooled(const ContinuousSample& a, const ContinuousSample& b) {
    a.validate();
    b.validate();
    if (a.d != b.d) throw ValidationError("pooled samples must share the dimension");
    ContinuousSample out(a.n + b.n, a.d);
    std::copy(a.data.begin(), a.data.end(), out.data.begin());
    std::copy(b.data.begin(), b.data.end(), out.data.begin() + a.data.size());
    LabelSplit split;
    split.labels.assign(static_cast<std::size_t>(a.n + b.n), 0);
    std::fill(split.labels.begin() + a.n, split.labels.end(), std::uint8_t{1});
    split.n = a.n;
    split.m = b.n;
    return {std::move(out), std::move(split)};
}

}  // namespace mvtest
