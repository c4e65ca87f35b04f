#pragma once

#include "mvtest/case_studies.hpp"
#include "mvtest/methods.hpp"

namespace mvtest {

// Report schema version, embedded in every JSON artifact.
inline constexpr const char* kSpecVersion = "1.0";

struct PowerCell {
    double rate = 0.0;
    std::int64_t reps = 0;
    bool applicable = true;
};

// Rejection rates per (case row, method column), with the parallel table
// of null rejection rates when requested.
struct PowerTable {
    ProblemKind kind = ProblemKind::GofContinuous;
    std::vector<std::string> cases;
    std::vector<std::string> methods;
    std::vector<double> lambdas;       // per row: alternative parameter used
    std::vector<PowerCell> power;      // row-major cases x methods
    std::vector<PowerCell> null_rate;  // same shape, empty when skipped
    std::int64_t n = 0, B = 0;
    double alpha = 0.05;
    std::uint64_t seed = 0;

    const PowerCell& at(std::size_t row, std::size_t col) const { return power[row * methods.size() + col]; }
};

struct PowerConfig {
    ProblemKind kind = ProblemKind::GofContinuous;
    std::int64_t n = 250;  // per-sample size; both samples for two-sample kinds
    double alpha = 0.05;
    std::int64_t reps = 1000;
    std::int64_t B = 500;
    bool with_null_table = true;
    GofOptions gof;  // grid size and BB/RK overrides shared with dispatch
};

// Monte-Carlo power study: for each case row, every method column is
// evaluated on the same simulated data sets (shared ensembles), counting
// p <= alpha. Method/case capability mismatches mark the cell not
// applicable. lambdas may be empty (per-case defaults) or one per case.
PowerTable run_power_study(const std::vector<const CaseStudy*>& cases, const std::vector<std::string>& methods,
                           const std::vector<double>& lambdas, const PowerConfig& cfg, const RngPlan& plan);

// Rejection rate of one method on one case at one lambda.
double estimate_power(const CaseStudy& cs, const std::string& method, double lambda, const PowerConfig& cfg,
                      const RngPlan& plan);

// Bisection on lambda until the estimated power lands within 3 simulation
// standard deviations of the target. Throws when [lambda_null, lambda_hi]
// does not bracket the target.
double calibrate_alt(const CaseStudy& cs, const std::string& method, double target_power, const PowerConfig& cfg,
                     const RngPlan& plan, int max_iter = 12);

// Aggregations over the power table; not-applicable cells are excluded
// from means and never count as close to best.
std::vector<double> mean_power(const PowerTable& t);
std::vector<double> close_to_best(const PowerTable& t, double factor = 0.90);  // percentages in [0,100]

// Every minimal set of method columns containing a near-best method
// (>= tie_tol * row max) for each row, by exhaustive cardinality search.
std::vector<std::vector<int>> best_selection(const std::vector<std::vector<double>>& rates, double tie_tol = 0.95);
std::vector<std::vector<int>> best_selection(const PowerTable& t, double tie_tol = 0.95);

enum class ReportFormat { text, json, csv };

std::string render_report(const PowerTable& t, ReportFormat f);
PowerTable power_table_from_json(const std::string& doc);

// Power of the equal-probability chi-square GOF test per i x i grid.
std::vector<std::pair<int, double>> bins_power_sweep(const CaseStudy& cs, double lambda, int bins_lo, int bins_hi,
                                                     std::int64_t n, double alpha, std::int64_t reps,
                                                     const RngPlan& plan);

}  // namespace mvtest
