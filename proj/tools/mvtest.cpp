// mvtest: multivariate goodness-of-fit and nonparametric two-sample tests
// with permutation / parametric-bootstrap calibration, plus a Monte-Carlo
// power-study harness over registered case studies.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <omp.h>

#include "CLI11.hpp"
#include "json.hpp"

#include "mvtest/case_studies.hpp"
#include "mvtest/csv.hpp"
#include "mvtest/errors.hpp"
#include "mvtest/methods.hpp"
#include "mvtest/power.hpp"

namespace {

using namespace mvtest;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(csv);
    while (std::getline(is, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

std::vector<double> split_doubles(const std::string& csv) {
    std::vector<double> out;
    for (const auto& tok : split_list(csv)) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ValidationError("not a number: \"" + tok + "\"");
        }
    }
    return out;
}

void parse_grid(const std::string& spec, int& nx, int& ny) {
    const auto pos = spec.find('x');
    if (pos == std::string::npos) throw ValidationError("grid must look like 5x5");
    try {
        nx = std::stoi(spec.substr(0, pos));
        ny = std::stoi(spec.substr(pos + 1));
    } catch (const std::exception&) {
        throw ValidationError("grid must look like 5x5");
    }
    if (nx < 2 || ny < 2) throw ValidationError("grid needs at least 2 bins per axis");
}

void apply_threads(int threads) {
    if (threads <= 0)
        if (const char* env = std::getenv("MVTEST_THREADS")) threads = std::atoi(env);
    if (threads > 0) omp_set_num_threads(threads);
}

nlohmann::ordered_json outcome_json(const TestOutcome& o) {
    nlohmann::ordered_json j;
    j["method"] = o.method;
    j["statistic"] = o.statistic;
    j["pvalue"] = o.pvalue;
    j["calibration"] = to_string(o.kind);
    j["replicates"] = o.replicates;
    j["seed"] = o.seed;
    return j;
}

std::string results_report(const std::string& command, const std::vector<TestOutcome>& results,
                           const std::string& format, std::uint64_t seed, std::int64_t B) {
    if (format == "json") {
        nlohmann::ordered_json j;
        j["spec_version"] = kSpecVersion;
        j["command"] = command;
        j["seed"] = seed;
        j["nsim"] = B;
        j["results"] = nlohmann::ordered_json::array();
        for (const auto& o : results) j["results"].push_back(outcome_json(o));
        return j.dump(2) + "\n";
    }
    if (format == "csv") {
        std::ostringstream os;
        os << "method,statistic,pvalue,calibration,replicates,seed\n";
        for (const auto& o : results) {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%s,%lld,%llu\n", o.method.c_str(), o.statistic, o.pvalue,
                          to_string(o.kind).c_str(), static_cast<long long>(o.replicates),
                          static_cast<unsigned long long>(o.seed));
            os << buf;
        }
        return os.str();
    }
    std::ostringstream os;
    os << command << "  seed=" << seed << "  nsim=" << B << "\n";
    os << "method       statistic      p-value  calibration  replicates\n";
    for (const auto& o : results) {
        char buf[120];
        std::snprintf(buf, sizeof buf, "%-11s %12.6g %12.6g  %-11s %10lld\n", o.method.c_str(), o.statistic, o.pvalue,
                      to_string(o.kind).c_str(), static_cast<long long>(o.replicates));
        os << buf;
    }
    return os.str();
}

void emit(const std::string& doc, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << doc;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) throw ValidationError("cannot open output file " + out_path);
    f << doc;
}

ProblemKind parse_kind(const std::string& s) {
    if (s == "gof" || s == "gof-continuous") return ProblemKind::GofContinuous;
    if (s == "gof-discrete") return ProblemKind::GofDiscrete;
    if (s == "twosample" || s == "twosample-continuous") return ProblemKind::TsContinuous;
    if (s == "twosample-discrete") return ProblemKind::TsDiscrete;
    throw ValidationError("unknown problem kind \"" + s + "\" (gof, gof-discrete, twosample, twosample-discrete)");
}

struct GofArgs {
    std::string data, model = "uniform", params_csv, case_id, method_csv, combine_csv, grid = "5x5", rk_csv;
    std::string format = "text", out;
    double lambda = -1.0, poisson_rate = 0.0;
    std::int64_t n = 250, B = 500;
    std::uint64_t seed = 0;
    int bb_points = 1024, hybrid_ratio = 0, threads = 0;
    bool discrete = false;
};

int cmd_gof(const GofArgs& a) {
    apply_threads(a.threads);
    const RngPlan plan{a.seed};
    auto tags = split_list(a.method_csv);
    if (tags.empty()) throw ValidationError("--method requires at least one tag");
    // A bare two-sample tag with --hybrid-ratio means the hybrid variant.
    if (a.hybrid_ratio != 0)
        for (auto& t : tags)
            if (!find_method(t, ProblemKind::GofContinuous) && !parse_hybrid_tag(t))
                t += "T" + std::to_string(a.hybrid_ratio);

    const CaseStudy* cs = a.case_id.empty() ? nullptr : find_case(a.case_id);
    if (!a.case_id.empty() && !cs) throw ValidationError("unknown case \"" + a.case_id + "\"");

    if (a.discrete) {
        if (!cs || !cs->has_discrete) throw ValidationError("discrete GOF needs --case with a gridded variant");
        DiscreteGridSample x;
        if (!a.data.empty()) {
            x = load_discrete_csv(a.data);
        } else {
            Rng rng = plan.sub(hash64("cli-data")).stream(0);
            x = cs->disc_sampler(a.n, a.lambda < 0 ? cs->lambda_default : a.lambda, rng);
        }
        const GridExpectation e = cs->disc_expectation(static_cast<double>(x.total()));
        const ExpectationFn fixed = [&e](const DiscreteGridSample& s) { return fixed_expectation(e, s); };
        const auto results = run_gof_discrete(x, fixed, tags, a.B, plan.sub(hash64("cli-test")));
        emit(results_report("gof", results, a.format, a.seed, a.B), a.out);
        return 0;
    }

    ContinuousSample x;
    NullModel model;
    if (cs) {
        model = cs->null_model;
        if (!a.data.empty()) {
            x = load_continuous_csv(a.data);
        } else {
            Rng rng = plan.sub(hash64("cli-data")).stream(0);
            x = cs->alt_sampler(a.n, a.lambda < 0 ? cs->lambda_default : a.lambda, rng);
        }
    } else {
        if (a.data.empty()) throw ValidationError("gof needs --data or --case");
        x = load_continuous_csv(a.data);
        const std::string name = a.model == "uniform2d" ? "uniform" : a.model;
        model = make_model(name, split_doubles(a.params_csv), x.d);
    }

    GofOptions opt;
    opt.B = a.B;
    parse_grid(a.grid, opt.grid_nx, opt.grid_ny);
    opt.bb.mc_points = a.bb_points;
    if (!a.rk_csv.empty()) opt.rk_radii = split_doubles(a.rk_csv);
    opt.poisson_rate = a.poisson_rate;

    auto results = run_gof(x, model, tags, opt, plan.sub(hash64("cli-test")));
    if (!a.combine_csv.empty())
        results.push_back(combined_gof(x, model, split_list(a.combine_csv), opt, plan.sub(hash64("cli-combined"))));
    emit(results_report("gof", results, a.format, a.seed, a.B), a.out);
    return 0;
}

struct TsArgs {
    std::string data1, data2, case_id, method_csv, combine_csv, grid = "5x5", format = "text", out;
    double lambda = -1.0;
    std::int64_t n = 200, B = 500;
    std::uint64_t seed = 0;
    int threads = 0;
    bool discrete = false;
};

int cmd_twosample(const TsArgs& a) {
    apply_threads(a.threads);
    const RngPlan plan{a.seed};
    const auto tags = split_list(a.method_csv);
    if (tags.empty()) throw ValidationError("--method requires at least one tag");

    const CaseStudy* cs = a.case_id.empty() ? nullptr : find_case(a.case_id);
    if (!a.case_id.empty() && !cs) throw ValidationError("unknown case \"" + a.case_id + "\"");

    if (a.discrete) {
        DiscreteGridSample x, y;
        if (cs && a.data1.empty()) {
            if (!cs->has_discrete) throw ValidationError("case has no gridded variant");
            Rng r1 = plan.sub(hash64("cli-data")).stream(0), r2 = plan.sub(hash64("cli-data")).stream(1);
            x = cs->disc_sampler(a.n, cs->lambda_null, r1);
            y = cs->disc_sampler(a.n, a.lambda < 0 ? cs->lambda_default : a.lambda, r2);
        } else {
            if (a.data1.empty() || a.data2.empty()) throw ValidationError("twosample needs --data1 and --data2");
            x = load_discrete_csv(a.data1);
            y = load_discrete_csv(a.data2);
        }
        if (x.valsx != y.valsx || x.valsy != y.valsy)
            throw CapabilityError("the two samples live on different grids");
        const auto results = run_twosample_discrete(x, y, tags, a.B, plan.sub(hash64("cli-test")));
        emit(results_report("twosample", results, a.format, a.seed, a.B), a.out);
        return 0;
    }

    ContinuousSample x, y;
    if (cs && a.data1.empty()) {
        Rng r1 = plan.sub(hash64("cli-data")).stream(0), r2 = plan.sub(hash64("cli-data")).stream(1);
        x = cs->alt_sampler(a.n, cs->lambda_null, r1);
        y = cs->alt_sampler(a.n, a.lambda < 0 ? cs->lambda_default : a.lambda, r2);
    } else {
        if (a.data1.empty() || a.data2.empty()) throw ValidationError("twosample needs --data1 and --data2");
        x = load_continuous_csv(a.data1);
        y = load_continuous_csv(a.data2);
    }
    if (x.d != y.d) throw CapabilityError("the two samples have different dimensions");

    TsOptions opt;
    opt.B = a.B;
    parse_grid(a.grid, opt.grid_nx, opt.grid_ny);
    auto results = run_twosample(x, y, tags, opt, plan.sub(hash64("cli-test")));
    if (!a.combine_csv.empty())
        results.push_back(combined_twosample(x, y, split_list(a.combine_csv), a.B, plan.sub(hash64("cli-combined"))));
    emit(results_report("twosample", results, a.format, a.seed, a.B), a.out);
    return 0;
}

struct PowerArgs {
    std::string kind = "gof", cases_csv, methods_csv, lambdas_csv, grid = "5x5", format = "text", out;
    double alpha = 0.05;
    std::int64_t n = 0, reps = 1000, B = 500;
    std::uint64_t seed = 0;
    int threads = 0;
    bool no_null = false;
};

int cmd_power(const PowerArgs& a) {
    apply_threads(a.threads);
    if (a.reps < 1) throw ValidationError("--reps must be positive");
    PowerConfig cfg;
    cfg.kind = parse_kind(a.kind);
    const bool twosample = cfg.kind == ProblemKind::TsContinuous || cfg.kind == ProblemKind::TsDiscrete;
    cfg.n = a.n > 0 ? a.n : (twosample ? 200 : 250);  // paper-scale defaults
    cfg.alpha = a.alpha;
    cfg.reps = a.reps;
    cfg.B = a.B;
    cfg.with_null_table = !a.no_null;
    parse_grid(a.grid, cfg.gof.grid_nx, cfg.gof.grid_ny);

    std::vector<const CaseStudy*> cases;
    for (const auto& id : split_list(a.cases_csv)) {
        const CaseStudy* cs = find_case(id);
        if (!cs) throw ValidationError("unknown case \"" + id + "\"");
        cases.push_back(cs);
    }
    if (cases.empty()) throw ValidationError("--cases requires at least one case id");
    const auto methods = split_list(a.methods_csv);
    if (methods.empty()) throw ValidationError("--methods requires at least one tag");
    const auto lambdas = a.lambdas_csv.empty() ? std::vector<double>{} : split_doubles(a.lambdas_csv);

    const PowerTable t = run_power_study(cases, methods, lambdas, cfg, RngPlan{a.seed});

    const std::string doc = render_report(
        t, a.format == "json" ? ReportFormat::json : a.format == "csv" ? ReportFormat::csv : ReportFormat::text);
    emit(doc, a.out);
    if (!a.out.empty()) {
        // echo the aggregate tables even when the full report went to a file
        const auto means = mean_power(t);
        const auto close = close_to_best(t, 0.90);
        std::cout << "mean power / close-to-best(90%):\n";
        for (std::size_t c = 0; c < t.methods.size(); ++c) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "  %-10s %6.3f  %5.1f%%\n", t.methods[c].c_str(), means[c], close[c]);
            std::cout << buf;
        }
        std::cout << "best selection(s):\n";
        for (const auto& sel : best_selection(t)) {
            std::cout << " ";
            for (int c : sel) std::cout << ' ' << t.methods[static_cast<std::size_t>(c)];
            std::cout << '\n';
        }
    }
    return 0;
}

int cmd_list_methods(const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& m : method_registry()) {
            nlohmann::ordered_json e;
            e["tag"] = m.tag;
            e["problem"] = to_string(m.kind);
            e["min_dim"] = m.min_dim;
            e["max_dim"] = m.max_dim;
            e["calibration"] = m.calibration;
            e["summary"] = m.summary;
            j.push_back(std::move(e));
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    ProblemKind last = ProblemKind::TsDiscrete;
    bool first = true;
    for (const auto& m : method_registry()) {
        if (first || m.kind != last) {
            std::cout << (first ? "" : "\n") << to_string(m.kind) << ":\n";
            last = m.kind;
            first = false;
        }
        char dims[24];
        if (m.max_dim == 0)
            std::snprintf(dims, sizeof dims, "d>=%d", m.min_dim);
        else
            std::snprintf(dims, sizeof dims, "d=%d..%d", m.min_dim, m.max_dim);
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-10s %-8s %-12s %s\n", m.tag.c_str(), dims, m.calibration.c_str(),
                      m.summary.c_str());
        std::cout << buf;
    }
    std::cout << "\nhybrid GOF: append T1 or T5 to any permutation two-sample tag (e.g. MMDT5)\n";
    return 0;
}

int cmd_list_cases(const std::string& format) {
    if (format == "json") {
        nlohmann::ordered_json j = nlohmann::ordered_json::array();
        for (const auto& c : case_registry()) {
            nlohmann::ordered_json e;
            e["id"] = c.id;
            e["dim"] = c.dim;
            e["marginals_equal"] = c.marginals_equal;
            e["discrete_variant"] = c.has_discrete;
            e["lambda_null"] = c.lambda_null;
            e["lambda_hi"] = c.lambda_hi;
            e["lambda_default"] = c.lambda_default;
            j.push_back(std::move(e));
        }
        std::cout << j.dump(2) << "\n";
        return 0;
    }
    for (const auto& c : case_registry()) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%-35s d=%d%s%s  lambda in [%g, %g], default %g\n", c.id.c_str(), c.dim,
                      c.marginals_equal ? "" : "  (marginals differ)", c.has_discrete ? "  (gridded variant)" : "",
                      c.lambda_null, c.lambda_hi, c.lambda_default);
        std::cout << buf;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multivariate goodness-of-fit and two-sample testing toolkit"};
    app.require_subcommand(1);

    GofArgs g;
    auto* gof = app.add_subcommand("gof", "test one sample against a null model");
    gof->add_option("--data", g.data, "continuous CSV (one observation per row)");
    gof->add_option("--model", g.model, "null family: uniform normal normal-est clayton frank gumbel joe joefrank dalitz");
    gof->add_option("--params", g.params_csv, "model parameters, comma separated");
    gof->add_option("--case", g.case_id, "registered case study (data simulated unless --data given)");
    gof->add_option("--lambda", g.lambda, "alternative parameter for --case");
    gof->add_option("--n", g.n, "simulated sample size for --case");
    gof->add_option("--method", g.method_csv, "method tags, comma separated")->required();
    gof->add_option("--nsim", g.B, "bootstrap replicates");
    gof->add_option("--seed", g.seed, "master seed");
    gof->add_option("--grid", g.grid, "chi-square grid, e.g. 5x5");
    gof->add_option("--bb-mc-points", g.bb_points, "integration points per ball");
    gof->add_option("--rk-radii", g.rk_csv, "radius grid, comma separated");
    gof->add_option("--hybrid-ratio", g.hybrid_ratio, "1 or 5: run bare two-sample tags as hybrids")
        ->check(CLI::IsMember({0, 1, 5}));
    gof->add_option("--combine", g.combine_csv, "min-p combination members");
    gof->add_option("--poisson-n", g.poisson_rate, "Poisson-distributed replicate sizes with this rate");
    gof->add_flag("--discrete", g.discrete, "gridded data (needs --case with a gridded variant)");
    gof->add_option("--format", g.format, "text|json|csv")->check(CLI::IsMember({"text", "json", "csv"}));
    gof->add_option("--out", g.out, "write the report here instead of stdout");
    gof->add_option("--threads", g.threads, "worker cap (default: MVTEST_THREADS or OpenMP default)");

    TsArgs t;
    auto* ts = app.add_subcommand("twosample", "test whether two samples share a distribution");
    ts->add_option("--data1", t.data1, "first sample CSV");
    ts->add_option("--data2", t.data2, "second sample CSV");
    ts->add_option("--case", t.case_id, "simulate both samples from a registered case");
    ts->add_option("--lambda", t.lambda, "alternative parameter for --case");
    ts->add_option("--n", t.n, "simulated per-sample size for --case");
    ts->add_option("--method", t.method_csv, "method tags, comma separated")->required();
    ts->add_option("--nsim", t.B, "permutation replicates");
    ts->add_option("--seed", t.seed, "master seed");
    ts->add_option("--grid", t.grid, "chi-square grid, e.g. 5x5");
    ts->add_option("--combine", t.combine_csv, "min-p combination members");
    ts->add_flag("--discrete", t.discrete, "gridded data");
    ts->add_option("--format", t.format, "text|json|csv")->check(CLI::IsMember({"text", "json", "csv"}));
    ts->add_option("--out", t.out, "write the report here instead of stdout");
    ts->add_option("--threads", t.threads, "worker cap");

    PowerArgs p;
    auto* pw = app.add_subcommand("power", "Monte-Carlo power study over cases x methods");
    pw->add_option("--kind", p.kind, "gof|gof-discrete|twosample|twosample-discrete");
    pw->add_option("--cases", p.cases_csv, "case ids, comma separated")->required();
    pw->add_option("--methods", p.methods_csv, "method tags, comma separated")->required();
    pw->add_option("--lambdas", p.lambdas_csv, "one alternative parameter per case (default: case defaults)");
    pw->add_option("--n", p.n, "per-sample size (default 250 GOF / 200 two-sample)");
    pw->add_option("--alpha", p.alpha, "test level");
    pw->add_option("--reps", p.reps, "Monte-Carlo replications per cell");
    pw->add_option("--nsim", p.B, "replicates per test");
    pw->add_option("--seed", p.seed, "master seed");
    pw->add_option("--grid", p.grid, "chi-square grid");
    pw->add_flag("--no-null-table", p.no_null, "skip the rates-under-null table");
    pw->add_option("--format", p.format, "text|json|csv")->check(CLI::IsMember({"text", "json", "csv"}));
    pw->add_option("--out", p.out, "write the report here");
    pw->add_option("--threads", p.threads, "worker cap");

    std::string lm_format = "text", lc_format = "text";
    auto* lm = app.add_subcommand("list-methods", "print the method registry");
    lm->add_option("--format", lm_format, "text|json")->check(CLI::IsMember({"text", "json"}));
    auto* lc = app.add_subcommand("list-cases", "print the case-study registry");
    lc->add_option("--format", lc_format, "text|json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gof->parsed()) return cmd_gof(g);
        if (ts->parsed()) return cmd_twosample(t);
        if (pw->parsed()) return cmd_power(p);
        if (lm->parsed()) return cmd_list_methods(lm_format);
        if (lc->parsed()) return cmd_list_cases(lc_format);
    } catch (const CapabilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
