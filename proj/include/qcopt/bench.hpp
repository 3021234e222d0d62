#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "qcopt/core.hpp"

namespace qcopt {

/// Per-call latency estimates (seconds) for the three Table-1 models, as
/// published alongside their prices.
inline constexpr double kTurboCallSeconds = 1.5;
inline constexpr double kDavinciCallSeconds = 2.0;
inline constexpr double kCurieCallSeconds = 0.4;
/// Tokens per call assumed when turning a per-call latency into seconds/token.
inline constexpr double kLatencyReferenceTokens = 500.0;

/// gpt-3.5-turbo (4K), text-davinci-003 and text-curie-001 with their
/// published per-token prices and latency estimates.
std::vector<ModelProfile> reference_models();

struct BetaParams {
    double a = 1.0;
    double b = 1.0;
};

struct BenchmarkConfig {
    std::uint64_t seed = 7;
    int n_sections = 100;
    std::vector<ModelProfile> models = reference_models();
    /// One Beta per model; empty means the defaults for reference_models().
    std::vector<BetaParams> score_distribution;
    std::int64_t min_tokens = 200;
    std::int64_t max_tokens = 2000;
    int summary_sentences = 5;
    /// Budgets as fractions of the way from the cheapest plan to the
    /// best-score plan. Ignored when `budgets` is non-empty.
    std::vector<double> budget_fractions = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> budgets;
    bool single_model_baseline = true;
    bool random_baseline = true;
    bool cascade_baseline = true;
    /// Stop threshold(s) for the cascade; one cascade row per value.
    std::vector<double> cascade_thresholds = {0.75};
    std::optional<double> latency_sla;
    bool repair_budget = false;

    /// Throws ValidationError on inconsistent parameters.
    void validate() const;
};

/// Beta defaults matched to reference_models(): means 0.76 / 0.75 / 0.70.
std::vector<BetaParams> default_score_distribution();

/// Seeded instance without a budget; the same config always yields the
/// same instance.
RoutingInstance generate_instance(const BenchmarkConfig& cfg);

struct BudgetPoint {
    double budget = 0.0;
    std::optional<double> fraction;
    std::string error;  // non-empty when the solver failed at this budget
    double cost = 0.0;
    double objective = 0.0;
    double mean_score = 0.0;
    double lp_objective = 0.0;
    double budget_violation_fraction = 0.0;
    Eigen::VectorXd allocation;
    double random_cost = 0.0;
    double random_mean_score = 0.0;
};

struct SingleModelRow {
    std::string model_id;
    double cost = 0.0;
    double mean_score = 0.0;
};

struct CascadeRow {
    double threshold = 0.0;
    double cost = 0.0;
    double mean_score = 0.0;
    double calls_per_section = 0.0;
    /// Our method at the smallest budget whose plan reaches the cascade's
    /// mean score.
    bool matched = false;
    double matched_budget = 0.0;
    double matched_cost = 0.0;
    double matched_mean_score = 0.0;
};

struct BenchmarkReport {
    std::uint64_t seed = 0;
    int n_sections = 0;
    std::vector<std::string> model_ids;
    double cheapest_cost = 0.0;
    double best_score_cost = 0.0;
    std::vector<BudgetPoint> points;  // ascending budget
    std::vector<SingleModelRow> single_model;
    std::vector<CascadeRow> cascade;
    double mean_violation = 0.0;
    double max_violation = 0.0;
};

/// Solves every budget point and the requested baselines on one instance.
BenchmarkReport run_budget_sweep(const BenchmarkConfig& cfg);

/// Mean score, cost and call count of the cheapest-first cascade on one
/// instance: each section is sent to models in ascending cost order until a
/// score reaches `threshold`; every call made is paid for.
CascadeRow run_cascade(const RoutingInstance& instance, double threshold);

/// Assignment routing each section to its highest-scoring model (ties to the
/// cheaper model, then the lower index).
std::vector<int> best_score_assignment(const RoutingInstance& instance);

nlohmann::json report_to_json(const BenchmarkReport& report);

/// Multi-seed summary: per-budget averages over seeds and the comparative
/// checks against the random and cascade baselines.
struct SweepSummary {
    std::vector<std::uint64_t> seeds;
    std::vector<double> fractions;
    std::vector<double> mean_score;         // ours, per budget fraction
    std::vector<double> random_mean_score;  // random baseline, per fraction
    std::vector<double> cost;
    double cascade_cost = 0.0;  // mean over seeds, first threshold
    double cascade_mean_score = 0.0;
    double matched_cost = 0.0;  // ours at the cascade's score
    int matched_seeds = 0;
    double mean_violation = 0.0;
    double max_violation = 0.0;
    int failed_points = 0;
    std::vector<BenchmarkReport> reports;
};

/// Runs run_budget_sweep for seeds cfg.seed, cfg.seed + 1, ...
SweepSummary run_seed_sweep(const BenchmarkConfig& cfg, int num_seeds);

nlohmann::json summary_to_json(const SweepSummary& summary, bool include_reports);

}  // namespace qcopt
