#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qcopt {

/// Absolute tolerance used whenever two currency amounts are compared.
inline constexpr double kCurrencyTolerance = 1e-9;

/// Marks a section that a plan leaves unrouted (partial flow solutions).
inline constexpr int kUnassigned = -1;

/// Cost, latency and output-length statistics of one LLM.
struct ModelProfile {
    std::string id;
    double input_cost_per_token = 0.0;   // currency / input token
    double output_cost_per_token = 0.0;  // currency / output token
    double fixed_cost = 0.0;             // currency / invocation
    double latency_per_token = 0.0;      // seconds / token
    double avg_tokens_per_sentence = 1.0;
    std::string tokenizer_id;

    /// Throws ValidationError if any rate is negative or non-finite.
    void validate() const;
};

/// One document section to be routed to a single model.
struct Section {
    std::string id;
    std::string text;
    std::map<std::string, std::int64_t> input_tokens_per_model;
    int summary_sentences = 1;

    /// Input length under `model_id`'s tokenizer. Throws ValidationError
    /// naming both ids when the entry is missing.
    std::int64_t input_tokens(const std::string& model_id) const;
};

/// ceil(summary_sentences * avg_tokens_per_sentence).
std::int64_t estimated_output_tokens(const Section& section, const ModelProfile& model);

/// C^I * input + C^O * estimated output + C^F.
double estimated_cost(const Section& section, const ModelProfile& model);

/// L * (input + estimated output). The zero-mean noise term is omitted.
double estimated_latency(const Section& section, const ModelProfile& model);

using ScoreMatrix = Eigen::MatrixXd;  // rows: sections, cols: models

/// A validated routing problem. Cost and latency coefficients are computed
/// once at construction; the object is immutable afterwards.
class RoutingInstance {
public:
    RoutingInstance() = default;
    RoutingInstance(std::vector<ModelProfile> models, std::vector<Section> sections,
                    ScoreMatrix scores, std::optional<double> budget = std::nullopt,
                    std::optional<double> latency_sla = std::nullopt,
                    std::optional<double> quality_floor = std::nullopt);

    const std::vector<ModelProfile>& models() const noexcept { return models_; }
    const std::vector<Section>& sections() const noexcept { return sections_; }
    const ScoreMatrix& scores() const noexcept { return scores_; }
    /// C_{i,j} laid out as (section, model).
    const Eigen::MatrixXd& costs() const noexcept { return costs_; }
    /// l_{i,j} laid out as (section, model).
    const Eigen::MatrixXd& latencies() const noexcept { return latencies_; }

    std::optional<double> budget() const noexcept { return budget_; }
    std::optional<double> latency_sla() const noexcept { return latency_sla_; }
    std::optional<double> quality_floor() const noexcept { return quality_floor_; }

    int num_sections() const noexcept { return static_cast<int>(sections_.size()); }
    int num_models() const noexcept { return static_cast<int>(models_.size()); }

    int model_index(const std::string& id) const;
    int section_index(const std::string& id) const;

    RoutingInstance with_budget(std::optional<double> budget) const;
    RoutingInstance with_latency_sla(std::optional<double> latency_sla) const;
    RoutingInstance with_quality_floor(std::optional<double> quality_floor) const;
    RoutingInstance with_scores(ScoreMatrix scores) const;

private:
    std::vector<ModelProfile> models_;
    std::vector<Section> sections_;
    ScoreMatrix scores_;
    Eigen::MatrixXd costs_;
    Eigen::MatrixXd latencies_;
    std::optional<double> budget_;
    std::optional<double> latency_sla_;
    std::optional<double> quality_floor_;
};

/// The outcome of any routing solver.
struct RoutingPlan {
    std::vector<int> assignment;  // model index per section, or kUnassigned
    double total_cost = 0.0;
    Eigen::VectorXd per_model_latency;
    double objective = 0.0;  // sum of assigned scores
    double budget_violation_fraction = 0.0;
    std::optional<double> lp_objective;
    bool feasible = true;

    std::vector<int> unassigned_sections() const;
    /// Fraction of sections routed to each model; sums to 1 when every
    /// section is assigned.
    Eigen::VectorXd allocation_fractions(int num_models) const;
    double mean_score(int num_sections) const;
};

/// Builds a plan from an assignment, summing costs in section order so that
/// equal assignments always produce bit-identical totals.
RoutingPlan evaluate_assignment(const RoutingInstance& instance, std::vector<int> assignment);

/// True when every model's accumulated latency is within the SLA (or no SLA).
bool satisfies_latency(const RoutingInstance& instance, const RoutingPlan& plan);

/// Cost of routing every section to its cheapest model.
double cheapest_assignment_cost(const RoutingInstance& instance);

}  // namespace qcopt
