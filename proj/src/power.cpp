#include "mvtest/power.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <omp.h>

#include "json.hpp"
#include "mvtest/errors.hpp"

namespace mvtest {

namespace {

bool method_applicable(const CaseStudy& cs, const std::string& tag, ProblemKind kind) {
    if (kind == ProblemKind::GofDiscrete || kind == ProblemKind::TsDiscrete) {
        if (!cs.has_discrete) return false;
        return find_method(tag, kind) != nullptr;
    }
    const MethodInfo* info = find_method(tag, kind);
    if (kind == ProblemKind::GofContinuous) {
        bool needs_sampler = false;
        if (!info) {
            const auto h = parse_hybrid_tag(tag);
            if (!h) return false;
            needs_sampler = true;
        } else {
            if (cs.dim < info->min_dim || (info->max_dim > 0 && cs.dim > info->max_dim)) return false;
            if (info->needs_cdf && !cs.null_model.has_cdf()) return false;
            if (info->needs_pdf && !cs.null_model.has_pdf()) return false;
            needs_sampler = info->needs_sampler;
            // EP binning inverts marginal cdfs, so it needs a cdf even
            // though the asymptotic test itself draws no samples.
            if ((tag == "ES" || tag == "EP") && !cs.null_model.has_cdf()) return false;
        }
        if (needs_sampler && !cs.null_model.has_sampler()) return false;
        return true;
    }
    if (!info) return false;
    return cs.dim >= info->min_dim && (info->max_dim == 0 || cs.dim <= info->max_dim);
}

// p-values of every requested method on one simulated data set.
std::vector<double> rep_pvalues(const CaseStudy& cs, const std::vector<std::string>& methods, double lambda,
                                const PowerConfig& cfg, const RngPlan& rep_plan) {
    const RngPlan data_plan = rep_plan.sub(hash64("data"));
    const RngPlan test_plan = rep_plan.sub(hash64("test"));
    std::vector<TestOutcome> res;
    switch (cfg.kind) {
        case ProblemKind::GofContinuous: {
            Rng rng = data_plan.stream(0);
            const ContinuousSample x = cs.alt_sampler(cfg.n, lambda, rng);
            GofOptions opt = cfg.gof;
            opt.B = cfg.B;
            res = run_gof(x, cs.null_model, methods, opt, test_plan);
            break;
        }
        case ProblemKind::GofDiscrete: {
            Rng rng = data_plan.stream(0);
            const DiscreteGridSample x = cs.disc_sampler(cfg.n, lambda, rng);
            const GridExpectation e = cs.disc_expectation(static_cast<double>(x.total()));
            const ExpectationFn fixed = [&e](const DiscreteGridSample& s) { return fixed_expectation(e, s); };
            res = run_gof_discrete(x, fixed, methods, cfg.B, test_plan);
            break;
        }
        case ProblemKind::TsContinuous: {
            Rng r1 = data_plan.stream(0), r2 = data_plan.stream(1);
            const ContinuousSample x = cs.alt_sampler(cfg.n, cs.lambda_null, r1);
            const ContinuousSample y = cs.alt_sampler(cfg.n, lambda, r2);
            TsOptions opt;
            opt.B = cfg.B;
            opt.grid_nx = cfg.gof.grid_nx;
            opt.grid_ny = cfg.gof.grid_ny;
            res = run_twosample(x, y, methods, opt, test_plan);
            break;
        }
        case ProblemKind::TsDiscrete: {
            Rng r1 = data_plan.stream(0), r2 = data_plan.stream(1);
            const DiscreteGridSample x = cs.disc_sampler(cfg.n, cs.lambda_null, r1);
            const DiscreteGridSample y = cs.disc_sampler(cfg.n, lambda, r2);
            res = run_twosample_discrete(x, y, methods, cfg.B, test_plan);
            break;
        }
    }
    std::vector<double> p(res.size());
    for (std::size_t i = 0; i < res.size(); ++i) p[i] = res[i].pvalue;
    return p;
}

// Shared core: rejection counts for one (case, lambda) row over all
// applicable methods. Integer accumulation keeps the result identical for
// every thread count.
std::vector<PowerCell> power_row(const CaseStudy& cs, const std::vector<std::string>& methods, double lambda,
                                 const PowerConfig& cfg, const RngPlan& row_plan) {
    const std::size_t M = methods.size();
    std::vector<int> app(M, 0);
    std::vector<std::string> active;
    for (std::size_t c = 0; c < M; ++c) {
        app[c] = method_applicable(cs, methods[c], cfg.kind) ? 1 : 0;
        if (app[c]) active.push_back(methods[c]);
    }
    std::vector<std::int64_t> counts(active.size(), 0);
    if (!active.empty()) {
#pragma omp parallel if (omp_get_level() == 0 && cfg.reps > 1)
        {
            std::vector<std::int64_t> local(active.size(), 0);
#pragma omp for schedule(dynamic, 1) nowait
            for (std::int64_t rep = 0; rep < cfg.reps; ++rep) {
                const auto p = rep_pvalues(cs, active, lambda, cfg, row_plan.sub(static_cast<std::uint64_t>(rep)));
                for (std::size_t c = 0; c < active.size(); ++c)
                    if (p[c] <= cfg.alpha) ++local[c];
            }
#pragma omp critical
            for (std::size_t c = 0; c < active.size(); ++c) counts[c] += local[c];
        }
    }
    std::vector<PowerCell> row(M);
    std::size_t a = 0;
    for (std::size_t c = 0; c < M; ++c) {
        if (!app[c]) {
            row[c].applicable = false;
            continue;
        }
        row[c].rate = static_cast<double>(counts[a]) / static_cast<double>(cfg.reps);
        row[c].reps = cfg.reps;
        ++a;
    }
    return row;
}

const char* kind_token(ProblemKind k) {
    switch (k) {
        case ProblemKind::GofContinuous: return "gof-continuous";
        case ProblemKind::GofDiscrete: return "gof-discrete";
        case ProblemKind::TsContinuous: return "twosample-continuous";
        case ProblemKind::TsDiscrete: return "twosample-discrete";
    }
    return "?";
}

ProblemKind kind_from_token(const std::string& s) {
    for (ProblemKind k : {ProblemKind::GofContinuous, ProblemKind::GofDiscrete, ProblemKind::TsContinuous,
                          ProblemKind::TsDiscrete})
        if (s == kind_token(k)) return k;
    throw ParseError("unknown problem kind \"" + s + "\"");
}

}  // namespace

PowerTable run_power_study(const std::vector<const CaseStudy*>& cases, const std::vector<std::string>& methods,
                           const std::vector<double>& lambdas, const PowerConfig& cfg, const RngPlan& plan) {
    if (cases.empty()) throw ValidationError("run_power_study: no cases");
    if (methods.empty()) throw ValidationError("run_power_study: no methods");
    if (cfg.reps < 1) throw ValidationError("run_power_study: reps must be positive");
    if (!lambdas.empty() && lambdas.size() != cases.size())
        throw ValidationError("run_power_study: one lambda per case required");

    PowerTable t;
    t.kind = cfg.kind;
    t.methods = methods;
    t.alpha = cfg.alpha;
    t.n = cfg.n;
    t.B = cfg.B;
    t.seed = plan.master_seed;
    for (std::size_t r = 0; r < cases.size(); ++r) {
        t.cases.push_back(cases[r]->id);
        t.lambdas.push_back(lambdas.empty() ? cases[r]->lambda_default : lambdas[r]);
    }
    t.power.resize(cases.size() * methods.size());
    if (cfg.with_null_table) t.null_rate.resize(cases.size() * methods.size());

    for (std::size_t r = 0; r < cases.size(); ++r) {
        const CaseStudy& cs = *cases[r];
        const RngPlan case_plan = plan.sub(hash64(cs.id.c_str()));
        const auto row = power_row(cs, methods, t.lambdas[r], cfg, case_plan.sub(hash64("power")));
        std::copy(row.begin(), row.end(), t.power.begin() + static_cast<std::ptrdiff_t>(r * methods.size()));
        if (cfg.with_null_table) {
            const auto nrow = power_row(cs, methods, cs.lambda_null, cfg, case_plan.sub(hash64("null")));
            std::copy(nrow.begin(), nrow.end(), t.null_rate.begin() + static_cast<std::ptrdiff_t>(r * methods.size()));
        }
    }
    return t;
}

double estimate_power(const CaseStudy& cs, const std::string& method, double lambda, const PowerConfig& cfg,
                      const RngPlan& plan) {
    if (!method_applicable(cs, method, cfg.kind))
        throw CapabilityError("method " + method + " not applicable to case " + cs.id);
    const auto row = power_row(cs, {method}, lambda, cfg, plan);
    return row[0].rate;
}

double calibrate_alt(const CaseStudy& cs, const std::string& method, double target_power, const PowerConfig& cfg,
                     const RngPlan& plan, int max_iter) {
    if (target_power <= cfg.alpha) return cs.lambda_null;
    if (target_power >= 1.0) throw ValidationError("calibrate_alt: target must be below 1");
    const double sd_floor = std::sqrt(target_power * (1.0 - target_power) / static_cast<double>(cfg.reps));

    double lo = cs.lambda_null, hi = cs.lambda_hi;
    const double p_hi = estimate_power(cs, method, hi, cfg, plan.sub(hash64("bracket")));
    if (p_hi + 3.0 * sd_floor < target_power)
        throw ValidationError("calibrate_alt: power at lambda_hi (" + std::to_string(p_hi) +
                              ") does not reach the target");
    if (std::abs(p_hi - target_power) <= 3.0 * sd_floor) return hi;

    double best = hi, best_gap = std::abs(p_hi - target_power);
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double p = estimate_power(cs, method, mid, cfg, plan.sub(hash64("step")).sub(static_cast<std::uint64_t>(it)));
        const double sd = std::max(sd_floor, std::sqrt(p * (1.0 - p) / static_cast<double>(cfg.reps)));
        if (std::abs(p - target_power) <= 3.0 * sd) return mid;
        if (std::abs(p - target_power) < best_gap) {
            best = mid;
            best_gap = std::abs(p - target_power);
        }
        (p < target_power ? lo : hi) = mid;
    }
    return best;
}

std::vector<double> mean_power(const PowerTable& t) {
    std::vector<double> out(t.methods.size(), 0.0);
    for (std::size_t c = 0; c < t.methods.size(); ++c) {
        double acc = 0.0;
        std::int64_t k = 0;
        for (std::size_t r = 0; r < t.cases.size(); ++r)
            if (t.at(r, c).applicable) {
                acc += t.at(r, c).rate;
                ++k;
            }
        out[c] = k ? acc / static_cast<double>(k) : 0.0;
    }
    return out;
}

std::vector<double> close_to_best(const PowerTable& t, double factor) {
    std::vector<double> out(t.methods.size(), 0.0);
    std::size_t rows_counted = 0;
    for (std::size_t r = 0; r < t.cases.size(); ++r) {
        double best = -1.0;
        for (std::size_t c = 0; c < t.methods.size(); ++c)
            if (t.at(r, c).applicable) best = std::max(best, t.at(r, c).rate);
        if (best < 0.0) continue;
        ++rows_counted;
        for (std::size_t c = 0; c < t.methods.size(); ++c)
            if (t.at(r, c).applicable && t.at(r, c).rate >= factor * best) out[c] += 1.0;
    }
    if (rows_counted)
        for (auto& v : out) v *= 100.0 / static_cast<double>(rows_counted);
    return out;
}

std::vector<std::vector<int>> best_selection(const std::vector<std::vector<double>>& rates, double tie_tol) {
    if (rates.empty()) return {{}};
    const std::size_t M = rates[0].size();
    if (M == 0 || M > 25) throw ValidationError("best_selection: need 1..25 methods");

    // Row coverage masks: bit c set when column c is near-best in the row.
    std::vector<std::uint32_t> row_mask;
    for (const auto& row : rates) {
        if (row.size() != M) throw ValidationError("best_selection: ragged table");
        double best = -std::numeric_limits<double>::infinity();
        for (double v : row) best = std::max(best, v);
        if (!std::isfinite(best)) continue;  // row with no applicable method
        std::uint32_t mask = 0;
        for (std::size_t c = 0; c < M; ++c)
            if (row[c] >= tie_tol * best) mask |= 1u << c;
        if (mask) row_mask.push_back(mask);
    }
    if (row_mask.empty()) return {{}};

    std::vector<std::vector<int>> found;
    std::vector<int> pick;
    // enumerate subsets of size k in lexicographic order
    std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t start, std::size_t left) {
        if (left == 0) {
            std::uint32_t sel = 0;
            for (int c : pick) sel |= 1u << c;
            for (std::uint32_t m : row_mask)
                if (!(m & sel)) return;
            found.push_back(pick);
            return;
        }
        for (std::size_t c = start; c + left <= M; ++c) {
            pick.push_back(static_cast<int>(c));
            rec(c + 1, left - 1);
            pick.pop_back();
        }
    };
    for (std::size_t k = 1; k <= M; ++k) {
        rec(0, k);
        if (!found.empty()) break;
    }
    return found;
}

std::vector<std::vector<int>> best_selection(const PowerTable& t, double tie_tol) {
    std::vector<std::vector<double>> rates(t.cases.size(), std::vector<double>(t.methods.size()));
    for (std::size_t r = 0; r < t.cases.size(); ++r)
        for (std::size_t c = 0; c < t.methods.size(); ++c)
            rates[r][c] = t.at(r, c).applicable ? t.at(r, c).rate : -std::numeric_limits<double>::infinity();
    return best_selection(rates, tie_tol);
}

namespace {

const char* tier_label(double rate, double best) {
    if (best <= 0.0) return rate >= best ? "best" : "low";
    if (rate >= best) return "best";
    if (rate >= 0.95 * best) return "95%";
    if (rate >= 0.75 * best) return "75%";
    if (rate >= 0.50 * best) return "50%";
    return "low";
}

nlohmann::ordered_json cell_json(const PowerCell& c) {
    nlohmann::ordered_json j;
    j["rate"] = c.rate;
    j["reps"] = c.reps;
    j["applicable"] = c.applicable;
    return j;
}

PowerCell cell_from_json(const nlohmann::json& j) {
    PowerCell c;
    c.rate = j.at("rate").get<double>();
    c.reps = j.at("reps").get<std::int64_t>();
    c.applicable = j.at("applicable").get<bool>();
    return c;
}

// Per-case method ranking, highest power first, with tier labels.
struct RankedMethod {
    std::string method;
    double rate;
    const char* tier;
};

std::vector<RankedMethod> rank_row(const PowerTable& t, std::size_t r) {
    std::vector<RankedMethod> v;
    double best = 0.0;
    for (std::size_t c = 0; c < t.methods.size(); ++c)
        if (t.at(r, c).applicable) best = std::max(best, t.at(r, c).rate);
    for (std::size_t c = 0; c < t.methods.size(); ++c)
        if (t.at(r, c).applicable) v.push_back({t.methods[c], t.at(r, c).rate, tier_label(t.at(r, c).rate, best)});
    std::stable_sort(v.begin(), v.end(), [](const RankedMethod& a, const RankedMethod& b) { return a.rate > b.rate; });
    return v;
}

std::string format_rate(const PowerCell& c) {
    if (!c.applicable) return "--";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.3f", c.rate);
    return buf;
}

}  // namespace

std::string render_report(const PowerTable& t, ReportFormat f) {
    if (f == ReportFormat::json) {
        nlohmann::ordered_json j;
        j["spec_version"] = kSpecVersion;
        j["kind"] = kind_token(t.kind);
        j["alpha"] = t.alpha;
        j["n"] = t.n;
        j["B"] = t.B;
        j["seed"] = t.seed;
        j["cases"] = t.cases;
        j["methods"] = t.methods;
        j["lambdas"] = t.lambdas;
        auto table_json = [&](const std::vector<PowerCell>& cells) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (std::size_t r = 0; r < t.cases.size(); ++r) {
                nlohmann::ordered_json row = nlohmann::ordered_json::array();
                for (std::size_t c = 0; c < t.methods.size(); ++c)
                    row.push_back(cell_json(cells[r * t.methods.size() + c]));
                rows.push_back(std::move(row));
            }
            return rows;
        };
        j["power"] = table_json(t.power);
        if (!t.null_rate.empty()) j["null_rate"] = table_json(t.null_rate);
        j["aggregates"]["mean_power"] = mean_power(t);
        j["aggregates"]["close_to_best_90"] = close_to_best(t, 0.90);
        nlohmann::ordered_json sels = nlohmann::ordered_json::array();
        for (const auto& sel : best_selection(t)) {
            nlohmann::ordered_json names = nlohmann::ordered_json::array();
            for (int c : sel) names.push_back(t.methods[static_cast<std::size_t>(c)]);
            sels.push_back(std::move(names));
        }
        j["aggregates"]["best_selections"] = sels;
        nlohmann::ordered_json ranking = nlohmann::ordered_json::array();
        for (std::size_t r = 0; r < t.cases.size(); ++r) {
            nlohmann::ordered_json row;
            row["case"] = t.cases[r];
            row["methods"] = nlohmann::ordered_json::array();
            for (const auto& m : rank_row(t, r)) {
                nlohmann::ordered_json e;
                e["method"] = m.method;
                e["rate"] = m.rate;
                e["tier"] = m.tier;
                row["methods"].push_back(std::move(e));
            }
            ranking.push_back(std::move(row));
        }
        j["ranking"] = ranking;
        return j.dump(2) + "\n";
    }

    if (f == ReportFormat::csv) {
        std::ostringstream os;
        os << "case,method,lambda,rate,reps,applicable,null_rate\n";
        for (std::size_t r = 0; r < t.cases.size(); ++r)
            for (std::size_t c = 0; c < t.methods.size(); ++c) {
                const auto& cell = t.at(r, c);
                os << t.cases[r] << ',' << t.methods[c] << ',' << t.lambdas[r] << ',' << cell.rate << ','
                   << cell.reps << ',' << (cell.applicable ? 1 : 0) << ',';
                if (!t.null_rate.empty()) os << t.null_rate[r * t.methods.size() + c].rate;
                os << '\n';
            }
        return os.str();
    }

    std::ostringstream os;
    os << "power study  kind=" << kind_token(t.kind) << "  n=" << t.n << "  B=" << t.B << "  alpha=" << t.alpha
       << "  seed=" << t.seed << "\n\n";
    os << "rejection rates (rows: cases, columns: methods; -- = not applicable)\n";
    std::size_t wc = 4;
    for (const auto& c : t.cases) wc = std::max(wc, c.size());
    os << std::string(wc, ' ') << "  lambda";
    for (const auto& m : t.methods) os << "  " << m;
    os << '\n';
    for (std::size_t r = 0; r < t.cases.size(); ++r) {
        os << t.cases[r] << std::string(wc - t.cases[r].size(), ' ');
        char lb[16];
        std::snprintf(lb, sizeof lb, "  %6.3f", t.lambdas[r]);
        os << lb;
        for (std::size_t c = 0; c < t.methods.size(); ++c) {
            const auto pad = t.methods[c].size() + 2;
            const std::string v = format_rate(t.at(r, c));
            os << std::string(pad > v.size() ? pad - v.size() : 1, ' ') << v;
        }
        os << '\n';
    }
    if (!t.null_rate.empty()) {
        os << "\nnull rejection rates (target " << t.alpha << ")\n";
        for (std::size_t r = 0; r < t.cases.size(); ++r) {
            os << t.cases[r] << std::string(wc - t.cases[r].size(), ' ') << "        ";
            for (std::size_t c = 0; c < t.methods.size(); ++c) {
                const auto pad = t.methods[c].size() + 2;
                const std::string v = format_rate(t.null_rate[r * t.methods.size() + c]);
                os << std::string(pad > v.size() ? pad - v.size() : 1, ' ') << v;
            }
            os << '\n';
        }
    }
    os << "\nmean power\n";
    const auto means = mean_power(t);
    for (std::size_t c = 0; c < t.methods.size(); ++c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "  %-10s %.3f\n", t.methods[c].c_str(), means[c]);
        os << buf;
    }
    os << "\npercent close to best (within 90%)\n";
    const auto close = close_to_best(t, 0.90);
    for (std::size_t c = 0; c < t.methods.size(); ++c) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "  %-10s %.0f\n", t.methods[c].c_str(), close[c]);
        os << buf;
    }
    os << "\nbest selection(s)\n";
    for (const auto& sel : best_selection(t)) {
        os << " ";
        for (int c : sel) os << ' ' << t.methods[static_cast<std::size_t>(c)];
        os << '\n';
    }
    os << "\nper-case ranking (tiers: best, 95%, 75%, 50%, low)\n";
    for (std::size_t r = 0; r < t.cases.size(); ++r) {
        os << "  " << t.cases[r] << ":";
        for (const auto& m : rank_row(t, r)) {
            char buf[48];
            std::snprintf(buf, sizeof buf, " %s=%.3f[%s]", m.method.c_str(), m.rate, m.tier);
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

PowerTable power_table_from_json(const std::string& doc) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("power report: ") + e.what());
    }
    PowerTable t;
    try {
        t.kind = kind_from_token(j.at("kind").get<std::string>());
        t.alpha = j.at("alpha").get<double>();
        t.n = j.at("n").get<std::int64_t>();
        t.B = j.at("B").get<std::int64_t>();
        t.seed = j.at("seed").get<std::uint64_t>();
        t.cases = j.at("cases").get<std::vector<std::string>>();
        t.methods = j.at("methods").get<std::vector<std::string>>();
        t.lambdas = j.at("lambdas").get<std::vector<double>>();
        auto read_table = [&](const nlohmann::json& rows, std::vector<PowerCell>& out) {
            for (const auto& row : rows)
                for (const auto& cell : row) out.push_back(cell_from_json(cell));
        };
        read_table(j.at("power"), t.power);
        if (j.contains("null_rate")) read_table(j.at("null_rate"), t.null_rate);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("power report: ") + e.what());
    }
    if (t.power.size() != t.cases.size() * t.methods.size())
        throw ParseError("power report: table shape mismatch");
    return t;
}

std::vector<std::pair<int, double>> bins_power_sweep(const CaseStudy& cs, double lambda, int bins_lo, int bins_hi,
                                                     std::int64_t n, double alpha, std::int64_t reps,
                                                     const RngPlan& plan) {
    if (bins_lo < 2 || bins_hi < bins_lo) throw ValidationError("bins_power_sweep: need 2 <= lo <= hi");
    std::vector<std::pair<int, double>> out;
    for (int bins = bins_lo; bins <= bins_hi; ++bins) {
        const RngPlan bp = plan.sub(static_cast<std::uint64_t>(bins));
        std::int64_t count = 0;
#pragma omp parallel for schedule(dynamic, 1) reduction(+ : count) if (omp_get_level() == 0 && reps > 1)
        for (std::int64_t rep = 0; rep < reps; ++rep) {
            Rng rng = bp.sub(hash64("data")).stream(static_cast<std::uint64_t>(rep));
            const ContinuousSample x = cs.alt_sampler(n, lambda, rng);
            const TestOutcome o = gof_chisq(x, cs.null_model, bins, bins, BinRule::EP);
            count += o.pvalue <= alpha;
        }
        out.emplace_back(bins, static_cast<double>(count) / static_cast<double>(reps));
    }
    return out;
}

}  // namespace mvtest
