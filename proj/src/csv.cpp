#include "mvtest/csv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "mvtest/errors.hpp"

namespace mvtest {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding blanks
        const auto b = field.find_first_not_of(" \t\r");
        const auto e = field.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : field.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

[[noreturn]] void fail(const std::string& origin, std::size_t lineno, const std::string& what) {
    throw ParseError(origin + ": line " + std::to_string(lineno) + ": " + what);
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r") == std::string::npos;
}

}  // namespace

ContinuousSample read_continuous_csv(std::istream& in, const std::string& origin) {
    std::vector<double> data;
    std::string line;
    std::size_t lineno = 0;
    int d = -1;
    std::int64_t n = 0;
    bool first_content = true;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto fields = split_fields(line);
        std::vector<double> row(fields.size());
        bool numeric = true;
        for (std::size_t j = 0; j < fields.size(); ++j)
            if (!parse_double(fields[j], row[j])) {
                numeric = false;
                break;
            }
        if (!numeric) {
            if (first_content) {  // header line
                first_content = false;
                continue;
            }
            fail(origin, lineno, "non-numeric field");
        }
        first_content = false;
        if (d < 0) d = static_cast<int>(row.size());
        if (static_cast<int>(row.size()) != d)
            fail(origin, lineno, "expected " + std::to_string(d) + " fields, got " + std::to_string(row.size()));
        for (double v : row)
            if (!std::isfinite(v)) fail(origin, lineno, "non-finite value");
        data.insert(data.end(), row.begin(), row.end());
        ++n;
    }
    if (n < 2) throw ValidationError(origin + ": needs at least 2 observations, got " + std::to_string(n));
    ContinuousSample s;
    s.data = std::move(data);
    s.n = n;
    s.d = d;
    s.validate();
    return s;
}

ContinuousSample load_continuous_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return read_continuous_csv(in, path);
}

DiscreteGridSample read_discrete_csv(std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) throw ParseError(origin + ": empty file");
    ++lineno;
    {
        auto h = split_fields(line);
        for (auto& f : h) std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
        if (h.size() != 3 || h[0] != "x" || h[1] != "y" || h[2] != "counts")
            fail(origin, lineno, "expected header \"x,y,counts\"");
    }
    std::map<std::pair<double, double>, std::int64_t> cells;
    while (std::getline(in, line)) {
        ++lineno;
        if (blank(line)) continue;
        const auto fields = split_fields(line);
        if (fields.size() != 3) fail(origin, lineno, "expected 3 fields");
        double x, y, c;
        if (!parse_double(fields[0], x) || !parse_double(fields[1], y) || !parse_double(fields[2], c))
            fail(origin, lineno, "non-numeric field");
        if (!std::isfinite(x) || !std::isfinite(y)) fail(origin, lineno, "non-finite grid value");
        if (!(c >= 0) || c != std::floor(c)) fail(origin, lineno, "counts must be nonnegative integers");
        if (!cells.emplace(std::make_pair(x, y), static_cast<std::int64_t>(c)).second)
            fail(origin, lineno, "duplicate grid cell");
    }
    DiscreteGridSample g;
    for (const auto& [k, v] : cells) {
        (void)v;
        g.valsx.push_back(k.first);
        g.valsy.push_back(k.second);
    }
    std::sort(g.valsx.begin(), g.valsx.end());
    g.valsx.erase(std::unique(g.valsx.begin(), g.valsx.end()), g.valsx.end());
    std::sort(g.valsy.begin(), g.valsy.end());
    g.valsy.erase(std::unique(g.valsy.begin(), g.valsy.end()), g.valsy.end());
    const std::size_t want = g.valsx.size() * g.valsy.size();
    if (cells.size() != want)
        throw ValidationError(origin + ": grid incomplete, " + std::to_string(cells.size()) + " cells for a " +
                              std::to_string(g.valsx.size()) + "x" + std::to_string(g.valsy.size()) + " value grid");
    g.counts.assign(want, 0);
    for (const auto& [k, v] : cells) {
        const auto ix = std::lower_bound(g.valsx.begin(), g.valsx.end(), k.first) - g.valsx.begin();
        const auto iy = std::lower_bound(g.valsy.begin(), g.valsy.end(), k.second) - g.valsy.begin();
        g.cell(static_cast<int>(ix), static_cast<int>(iy)) = v;
    }
    g.validate();
    return g;
}

DiscreteGridSample load_discrete_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(path + ": cannot open file");
    return read_discrete_csv(in, path);
}

void write_continuous_csv(const std::string& path, const ContinuousSample& s) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    char buf[64];
    for (std::int64_t i = 0; i < s.n; ++i) {
        for (int j = 0; j < s.d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", s.at(i, j));
            out << (j ? "," : "") << buf;
        }
        out << '\n';
    }
}

void write_discrete_csv(const std::string& path, const DiscreteGridSample& s) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open file for writing");
    out << "x,y,counts\n";
    char buf[64];
    for (int j = 0; j < s.gy(); ++j)
        for (int i = 0; i < s.gx(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g,%.17g,%lld", s.valsx[i], s.valsy[j],
                          static_cast<long long>(s.cell(i, j)));
            out << buf << '\n';
        }
}

}  // namespace mvtest
