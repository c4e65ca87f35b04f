#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "doctest.h"
#include "json.hpp"
#include "mvtest/case_studies.hpp"
#include "mvtest/errors.hpp"
#include "mvtest/power.hpp"
#include "mvtest/rng.hpp"

using namespace mvtest;

namespace {

PowerConfig quick_cfg(ProblemKind kind, std::int64_t n, std::int64_t reps, std::int64_t B) {
    PowerConfig cfg;
    cfg.kind = kind;
    cfg.n = n;
    cfg.reps = reps;
    cfg.B = B;
    return cfg;
}

PowerCell cell(double rate, bool applicable = true) {
    PowerCell c;
    c.rate = rate;
    c.reps = 200;
    c.applicable = applicable;
    if (!applicable) c.reps = 0;
    return c;
}

// Three cases by three methods with one dead cell and one dead row.
PowerTable hand_table() {
    PowerTable t;
    t.kind = ProblemKind::GofContinuous;
    t.cases = {"a", "b", "c"};
    t.methods = {"m1", "m2", "m3"};
    t.lambdas = {0.5, 0.5, 0.5};
    t.n = 100;
    t.B = 99;
    t.seed = 7;
    t.power = {cell(0.9), cell(0.5), cell(0.0, false),
               cell(0.2), cell(0.8), cell(0.4),
               cell(0.0, false), cell(0.0, false), cell(0.0, false)};
    return t;
}

// Independent minimum-cover search over all 2^M method subsets.
std::vector<std::vector<int>> brute_selection(const std::vector<std::vector<double>>& rates, double tol) {
    const int M = static_cast<int>(rates[0].size());
    std::vector<std::uint32_t> masks;
    for (const auto& row : rates) {
        double best = -std::numeric_limits<double>::infinity();
        for (double v : row) best = std::max(best, v);
        if (!std::isfinite(best)) continue;
        std::uint32_t m = 0;
        for (int c = 0; c < M; ++c)
            if (row[static_cast<std::size_t>(c)] >= tol * best) m |= 1u << c;
        masks.push_back(m);
    }
    if (masks.empty()) return {{}};
    std::vector<std::vector<int>> hits;
    for (int k = 1; k <= M && hits.empty(); ++k) {
        for (std::uint32_t s = 0; s < (1u << M); ++s) {
            if (__builtin_popcount(s) != k) continue;
            bool covers = true;
            for (std::uint32_t m : masks)
                if (!(m & s)) {
                    covers = false;
                    break;
                }
            if (!covers) continue;
            std::vector<int> v;
            for (int c = 0; c < M; ++c)
                if (s & (1u << c)) v.push_back(c);
            hits.push_back(v);
        }
    }
    return hits;
}

std::vector<std::vector<int>> sorted(std::vector<std::vector<int>> v) {
    std::sort(v.begin(), v.end());
    return v;
}

}  // namespace

TEST_CASE("power study fills a row-major table with capability gaps marked") {
    const std::vector<const CaseStudy*> cases = {find_case("uniform.uniform-diagonal"),
                                                 find_case("uniform.uniform-diagonal-5")};
    const std::vector<std::string> methods = {"EP", "qKS", "FF"};
    const PowerConfig cfg = quick_cfg(ProblemKind::GofContinuous, 60, 40, 49);
    const RngPlan plan{4242};
    const PowerTable t = run_power_study(cases, methods, {}, cfg, plan);

    CHECK(t.kind == ProblemKind::GofContinuous);
    CHECK(t.cases == std::vector<std::string>{"uniform.uniform-diagonal", "uniform.uniform-diagonal-5"});
    CHECK(t.methods == methods);
    // empty lambda list means per-case defaults
    CHECK(t.lambdas == std::vector<double>{0.75, 0.75});
    CHECK(t.n == 60);
    CHECK(t.B == 49);
    CHECK(t.seed == 4242);
    REQUIRE(t.power.size() == 6);
    REQUIRE(t.null_rate.size() == 6);
    for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(&t.at(r, c) == &t.power[r * 3 + c]);

    // EP and FF are 2-d only; qKS runs everywhere.
    CHECK(t.at(0, 0).applicable);
    CHECK(t.at(0, 2).applicable);
    CHECK(t.at(1, 1).applicable);
    CHECK_FALSE(t.at(1, 0).applicable);
    CHECK_FALSE(t.at(1, 2).applicable);
    for (std::size_t i = 0; i < t.power.size(); ++i) {
        if (!t.power[i].applicable) {
            CHECK(t.power[i].reps == 0);
            CHECK_FALSE(t.null_rate[i].applicable);
            continue;
        }
        CHECK(t.power[i].reps == 40);
        CHECK(t.power[i].rate >= 0.0);
        CHECK(t.power[i].rate <= 1.0);
        // null rows target alpha = 0.05
        CHECK(t.null_rate[i].rate <= 0.25);
    }

    SUBCASE("same plan reproduces every cell bit for bit") {
        const PowerTable u = run_power_study(cases, methods, {}, cfg, plan);
        for (std::size_t i = 0; i < t.power.size(); ++i) {
            CHECK(u.power[i].rate == t.power[i].rate);
            CHECK(u.null_rate[i].rate == t.null_rate[i].rate);
        }
    }
    SUBCASE("thread count does not change the table") {
        const int saved = omp_get_max_threads();
        for (int threads : {1, 2, 3}) {
            omp_set_num_threads(threads);
            const PowerTable u = run_power_study(cases, methods, {}, cfg, plan);
            for (std::size_t i = 0; i < t.power.size(); ++i) {
                CHECK(u.power[i].rate == t.power[i].rate);
                CHECK(u.null_rate[i].rate == t.null_rate[i].rate);
            }
        }
        omp_set_num_threads(saved);
    }
    SUBCASE("explicit lambdas are stored per row") {
        PowerConfig c2 = cfg;
        c2.reps = 4;
        c2.with_null_table = false;
        const PowerTable u = run_power_study(cases, methods, {0.2, 0.9}, c2, plan);
        CHECK(u.lambdas == std::vector<double>{0.2, 0.9});
        CHECK(u.null_rate.empty());
    }
}

TEST_CASE("power study rejects bad inputs") {
    const std::vector<const CaseStudy*> cases = {find_case("uniform.uniform-diagonal")};
    PowerConfig cfg = quick_cfg(ProblemKind::GofContinuous, 30, 2, 19);
    const RngPlan plan{5};
    CHECK_THROWS_AS(run_power_study({}, {"EP"}, {}, cfg, plan), ValidationError);
    CHECK_THROWS_AS(run_power_study(cases, {}, {}, cfg, plan), ValidationError);
    CHECK_THROWS_AS(run_power_study(cases, {"EP"}, {0.1, 0.2}, cfg, plan), ValidationError);
    cfg.reps = 0;
    CHECK_THROWS_AS(run_power_study(cases, {"EP"}, {}, cfg, plan), ValidationError);
}

TEST_CASE("capability gaps follow the model surface, not just the dimension") {
    // DalitzPDG exposes pdf and sampler but no cdf: cdf-based tags drop out,
    // density and hybrid tags stay.
    const std::vector<const CaseStudy*> cases = {find_case("DalitzPDG")};
    PowerConfig cfg = quick_cfg(ProblemKind::GofContinuous, 40, 3, 9);
    cfg.with_null_table = false;
    const PowerTable t = run_power_study(cases, {"qKS", "EP", "BR", "BFT1"}, {}, cfg, RngPlan{77});
    CHECK_FALSE(t.at(0, 0).applicable);
    CHECK_FALSE(t.at(0, 1).applicable);
    CHECK(t.at(0, 2).applicable);
    CHECK(t.at(0, 3).applicable);
}

TEST_CASE("discrete study marks cases without a grid sampler not applicable") {
    const std::vector<const CaseStudy*> cases = {find_case("mix.Joe.Frank"), find_case("uniform.uniform-diagonal")};
    const PowerConfig cfg = quick_cfg(ProblemKind::GofDiscrete, 80, 25, 49);
    const PowerTable t = run_power_study(cases, {"P", "KS"}, {}, cfg, RngPlan{31});
    CHECK(t.at(0, 0).applicable);
    CHECK(t.at(0, 1).applicable);
    CHECK_FALSE(t.at(1, 0).applicable);
    CHECK_FALSE(t.at(1, 1).applicable);
    CHECK(t.null_rate[0].rate <= 0.3);
    CHECK(t.null_rate[1].rate <= 0.3);
}

TEST_CASE("two-sample study runs permutation and asymptotic columns together") {
    const std::vector<const CaseStudy*> cases = {find_case("uniform.uniform-diagonal")};
    const PowerConfig cfg = quick_cfg(ProblemKind::TsContinuous, 40, 30, 49);
    const PowerTable t = run_power_study(cases, {"KS", "FR", "EP"}, {}, cfg, RngPlan{90210});
    REQUIRE(t.power.size() == 3);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(t.at(0, c).applicable);
        CHECK(t.at(0, c).rate >= 0.0);
        CHECK(t.null_rate[c].rate <= 0.3);
    }
}

TEST_CASE("estimate_power separates null from a strong alternative") {
    const CaseStudy& cs = *find_case("uniform.uniform-diagonal");
    const PowerConfig cfg = quick_cfg(ProblemKind::GofContinuous, 200, 200, 0);
    const RngPlan plan{616};
    const double at_null = estimate_power(cs, "EP", cs.lambda_null, cfg, plan);
    const double at_hi = estimate_power(cs, "EP", 1.0, cfg, plan.sub(1));
    CHECK(at_null <= 0.12);
    CHECK(at_hi >= 0.8);
    CHECK_THROWS_AS(estimate_power(*find_case("uniform.uniform-diagonal-5"), "FF", 0.5, cfg, plan), CapabilityError);
}

TEST_CASE("calibrate_alt lands near the target power") {
    const CaseStudy& cs = *find_case("uniform.uniform-diagonal");
    const PowerConfig cfg = quick_cfg(ProblemKind::GofContinuous, 150, 120, 0);
    const RngPlan plan{2024};
    const double lam = calibrate_alt(cs, "EP", 0.5, cfg, plan);
    CHECK(lam > cs.lambda_null);
    CHECK(lam <= cs.lambda_hi);
    PowerConfig check_cfg = cfg;
    check_cfg.reps = 300;
    const double p = estimate_power(cs, "EP", lam, check_cfg, RngPlan{999});
    CHECK(std::abs(p - 0.5) <= 0.22);

    // target at or below alpha is the null itself
    CHECK(calibrate_alt(cs, "EP", 0.05, cfg, plan) == cs.lambda_null);
    CHECK_THROWS_AS(calibrate_alt(cs, "EP", 1.0, cfg, plan), ValidationError);

    // a weak test at tiny n cannot bracket an ambitious target
    const PowerConfig weak = quick_cfg(ProblemKind::GofContinuous, 10, 80, 29);
    CHECK_THROWS_AS(calibrate_alt(cs, "qKS", 0.95, weak, RngPlan{8}), ValidationError);
}

TEST_CASE("mean power and close-to-best skip non-applicable cells") {
    const PowerTable t = hand_table();
    const auto means = mean_power(t);
    REQUIRE(means.size() == 3);
    CHECK(means[0] == doctest::Approx(0.55));
    CHECK(means[1] == doctest::Approx(0.65));
    CHECK(means[2] == doctest::Approx(0.4));

    // row c has no applicable cells, so percentages are out of two rows
    const auto close90 = close_to_best(t, 0.90);
    CHECK(close90[0] == doctest::Approx(50.0));
    CHECK(close90[1] == doctest::Approx(50.0));
    CHECK(close90[2] == doctest::Approx(0.0));
    const auto close50 = close_to_best(t, 0.50);
    CHECK(close50[0] == doctest::Approx(50.0));
    CHECK(close50[1] == doctest::Approx(100.0));
    CHECK(close50[2] == doctest::Approx(50.0));

    CHECK(best_selection(t) == std::vector<std::vector<int>>{{0, 1}});
}

TEST_CASE("best_selection edge behavior") {
    const std::vector<std::vector<double>> none;
    CHECK(best_selection(none, 0.95) == std::vector<std::vector<int>>{{}});
    CHECK(best_selection({{-std::numeric_limits<double>::infinity()}}, 0.95) ==
          std::vector<std::vector<int>>{{}});
    const std::vector<std::vector<double>> zero_wide(1);
    CHECK_THROWS_AS(best_selection(zero_wide, 0.95), ValidationError);
    CHECK_THROWS_AS(best_selection({std::vector<double>(26, 1.0)}, 0.95), ValidationError);
    CHECK_THROWS_AS(best_selection({{0.1, 0.2}, {0.1}}, 0.95), ValidationError);

    // a 0.96 runner-up ties under the default tolerance but not under 0.97
    CHECK(sorted(best_selection({{1.0, 0.96}}, 0.95)) == std::vector<std::vector<int>>{{0}, {1}});
    CHECK(best_selection({{1.0, 0.96}}, 0.97) == std::vector<std::vector<int>>{{0}});
    // complementary specialists force a pair
    CHECK(best_selection({{1.0, 0.0}, {0.0, 1.0}}, 0.95) == std::vector<std::vector<int>>{{0, 1}});
}

TEST_CASE("best_selection agrees with exhaustive subset search") {
    Rng r(13371337);
    for (int inst = 0; inst < 100; ++inst) {
        std::vector<std::vector<double>> rates(10, std::vector<double>(8));
        for (auto& row : rates)
            for (auto& v : row) {
                if (r.uniform() < 0.12)
                    v = -std::numeric_limits<double>::infinity();  // not applicable
                else
                    v = std::floor(r.uniform() * 11.0) / 10.0;  // coarse grid makes ties common
            }
        const auto got = best_selection(rates, 0.95);
        const auto want = brute_selection(rates, 0.95);
        REQUIRE_FALSE(got.empty());
        CHECK(sorted(got) == sorted(want));
        // every reported set has the same (minimal) size
        for (const auto& s : got) CHECK(s.size() == got[0].size());
    }
}

TEST_CASE("reports render in all three formats and json round-trips") {
    const std::vector<const CaseStudy*> cases = {find_case("uniform.uniform-diagonal"),
                                                 find_case("uniform.uniform-diagonal-5")};
    const std::vector<std::string> methods = {"EP", "qKS"};
    const PowerConfig cfg = quick_cfg(ProblemKind::GofContinuous, 50, 20, 29);
    const PowerTable t = run_power_study(cases, methods, {}, cfg, RngPlan{240814});

    const std::string text = render_report(t, ReportFormat::text);
    CHECK(text.find("power study") != std::string::npos);
    CHECK(text.find("uniform.uniform-diagonal-5") != std::string::npos);
    CHECK(text.find("mean power") != std::string::npos);
    CHECK(text.find("best selection") != std::string::npos);
    CHECK(text.find("--") != std::string::npos);  // EP unavailable in 5-d

    const std::string csv = render_report(t, ReportFormat::csv);
    std::istringstream is(csv);
    std::string line;
    std::getline(is, line);
    CHECK(line == "case,method,lambda,rate,reps,applicable,null_rate");
    std::vector<std::string> rows;
    while (std::getline(is, line)) rows.push_back(line);
    REQUIRE(rows.size() == 4);
    CHECK(rows[2].find("uniform.uniform-diagonal-5,EP,") == 0);
    CHECK(rows[2].find(",0,") != std::string::npos);  // applicable flag renders as 0

    const std::string doc = render_report(t, ReportFormat::json);
    CHECK(doc.find("\"spec_version\": \"1.0\"") != std::string::npos);
    const PowerTable u = power_table_from_json(doc);
    CHECK(u.kind == t.kind);
    CHECK(u.alpha == t.alpha);
    CHECK(u.n == t.n);
    CHECK(u.B == t.B);
    CHECK(u.seed == t.seed);
    CHECK(u.cases == t.cases);
    CHECK(u.methods == t.methods);
    CHECK(u.lambdas == t.lambdas);
    REQUIRE(u.power.size() == t.power.size());
    REQUIRE(u.null_rate.size() == t.null_rate.size());
    for (std::size_t i = 0; i < t.power.size(); ++i) {
        CHECK(u.power[i].rate == t.power[i].rate);
        CHECK(u.power[i].reps == t.power[i].reps);
        CHECK(u.power[i].applicable == t.power[i].applicable);
        CHECK(u.null_rate[i].rate == t.null_rate[i].rate);
    }

    SUBCASE("a table without a null block round-trips too") {
        PowerConfig c2 = cfg;
        c2.with_null_table = false;
        c2.reps = 3;
        const PowerTable s = run_power_study(cases, methods, {}, c2, RngPlan{6});
        const PowerTable s2 = power_table_from_json(render_report(s, ReportFormat::json));
        CHECK(s2.null_rate.empty());
        const std::string c = render_report(s, ReportFormat::csv);
        CHECK(c.find(",1,\n") != std::string::npos);  // trailing null column left empty
    }
    SUBCASE("malformed documents raise parse errors") {
        CHECK_THROWS_AS(power_table_from_json("not json"), ParseError);
        CHECK_THROWS_AS(power_table_from_json("{\"kind\": \"gof-continuous\"}"), ParseError);
        nlohmann::json j = nlohmann::json::parse(doc);
        j["power"].erase(1);  // drop a row: shape no longer matches cases x methods
        CHECK_THROWS_AS(power_table_from_json(j.dump()), ParseError);
        j = nlohmann::json::parse(doc);
        j["kind"] = "sideways";
        CHECK_THROWS_AS(power_table_from_json(j.dump()), ParseError);
    }
}

TEST_CASE("bins sweep holds its size under the null and prefers coarse grids under dependence") {
    const CaseStudy& null_cs = *find_case("uniform.uniform-diagonal");
    const RngPlan plan{55555};
    CHECK_THROWS_AS(bins_power_sweep(null_cs, 0.5, 1, 4, 100, 0.05, 10, plan), ValidationError);
    CHECK_THROWS_AS(bins_power_sweep(null_cs, 0.5, 5, 4, 100, 0.05, 10, plan), ValidationError);

    const auto flat = bins_power_sweep(null_cs, null_cs.lambda_null, 3, 5, 150, 0.05, 200, plan);
    REQUIRE(flat.size() == 3);
    for (std::size_t i = 0; i < flat.size(); ++i) {
        CHECK(flat[i].first == 3 + static_cast<int>(i));
        CHECK(flat[i].second <= 0.12);
    }

    const CaseStudy& cor = *find_case("normal-ind.normal-cor");
    const auto sweep = bins_power_sweep(cor, 0.45, 5, 12, 150, 0.05, 200, plan.sub(2));
    REQUIRE(sweep.size() == 8);
    CHECK(sweep.front().first == 5);
    CHECK(sweep.back().first == 12);
    // oversized grids dilute the cell counts and lose power
    CHECK(sweep.front().second - sweep.back().second >= 0.08);

    const auto again = bins_power_sweep(cor, 0.45, 5, 12, 150, 0.05, 200, plan.sub(2));
    CHECK(again == sweep);
}
