#include "qcopt/core.hpp"

#include "qcopt/error.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace qcopt {

namespace {

void require_rate(double value, const char* field, const std::string& model_id) {
    if (!std::isfinite(value) || value < 0.0) {
        throw ValidationError("model '" + model_id + "': " + field + " must be finite and >= 0");
    }
}

}  // namespace

void ModelProfile::validate() const {
    if (id.empty()) {
        throw ValidationError("model id must be non-empty");
    }
    require_rate(input_cost_per_token, "input_cost_per_token", id);
    require_rate(output_cost_per_token, "output_cost_per_token", id);
    require_rate(fixed_cost, "fixed_cost", id);
    require_rate(latency_per_token, "latency_per_token", id);
    if (!std::isfinite(avg_tokens_per_sentence) || avg_tokens_per_sentence <= 0.0) {
        throw ValidationError("model '" + id + "': avg_tokens_per_sentence must be > 0");
    }
}

std::int64_t Section::input_tokens(const std::string& model_id) const {
    auto it = input_tokens_per_model.find(model_id);
    if (it == input_tokens_per_model.end()) {
        throw ValidationError("section '" + id + "' has no token count for model '" + model_id + "'");
    }
    return it->second;
}

std::int64_t estimated_output_tokens(const Section& section, const ModelProfile& model) {
    return static_cast<std::int64_t>(
        std::ceil(static_cast<double>(section.summary_sentences) * model.avg_tokens_per_sentence));
}

double estimated_cost(const Section& section, const ModelProfile& model) {
    const auto input = static_cast<double>(section.input_tokens(model.id));
    const auto output = static_cast<double>(estimated_output_tokens(section, model));
    return model.input_cost_per_token * input + model.output_cost_per_token * output + model.fixed_cost;
}

double estimated_latency(const Section& section, const ModelProfile& model) {
    const auto tokens = section.input_tokens(model.id) + estimated_output_tokens(section, model);
    return model.latency_per_token * static_cast<double>(tokens);
}

RoutingInstance::RoutingInstance(std::vector<ModelProfile> models, std::vector<Section> sections,
                                 ScoreMatrix scores, std::optional<double> budget,
                                 std::optional<double> latency_sla,
                                 std::optional<double> quality_floor)
    : models_(std::move(models)),
      sections_(std::move(sections)),
      scores_(std::move(scores)),
      budget_(budget),
      latency_sla_(latency_sla),
      quality_floor_(quality_floor) {
    const int n = num_sections();
    const int k = num_models();
    if (k == 0) {
        throw ValidationError("instance has no models");
    }
    for (int i = 0; i < k; ++i) {
        models_[i].validate();
        for (int other = 0; other < i; ++other) {
            if (models_[other].id == models_[i].id) {
                throw ValidationError("duplicate model id '" + models_[i].id + "'");
            }
        }
    }
    if (scores_.rows() != n || scores_.cols() != k) {
        throw ValidationError("score matrix is " + std::to_string(scores_.rows()) + "x" +
                              std::to_string(scores_.cols()) + ", expected " + std::to_string(n) +
                              "x" + std::to_string(k));
    }
    for (const auto* value : {&budget_, &latency_sla_, &quality_floor_}) {
        if (*value && (!std::isfinite(**value) || **value < 0.0)) {
            throw ValidationError("budget, latency_sla and quality_floor must be finite and >= 0");
        }
    }

    std::set<std::string> section_ids;
    for (const auto& s : sections_) {
        if (!section_ids.insert(s.id).second) {
            throw ValidationError("duplicate section id '" + s.id + "'");
        }
    }

    costs_.resize(n, k);
    latencies_.resize(n, k);
    for (int j = 0; j < n; ++j) {
        const Section& s = sections_[j];
        if (s.id.empty()) {
            throw ValidationError("section " + std::to_string(j) + " has an empty id");
        }
        if (s.summary_sentences < 1) {
            throw ValidationError("section '" + s.id + "': summary_sentences must be >= 1");
        }
        for (const auto& [model_id, count] : s.input_tokens_per_model) {
            if (count < 0) {
                throw ValidationError("section '" + s.id + "': negative token count for model '" +
                                      model_id + "'");
            }
        }
        for (int i = 0; i < k; ++i) {
            const double score = scores_(j, i);
            if (!std::isfinite(score) || score < 0.0 || score > 1.0) {
                throw ValidationError("score for section '" + s.id + "', model '" + models_[i].id +
                                      "' is " + std::to_string(score) + ", outside [0,1]");
            }
            costs_(j, i) = estimated_cost(s, models_[i]);
            latencies_(j, i) = estimated_latency(s, models_[i]);
        }
    }
}

int RoutingInstance::model_index(const std::string& id) const {
    for (int i = 0; i < num_models(); ++i) {
        if (models_[i].id == id) return i;
    }
    throw ValidationError("unknown model id '" + id + "'");
}

int RoutingInstance::section_index(const std::string& id) const {
    for (int j = 0; j < num_sections(); ++j) {
        if (sections_[j].id == id) return j;
    }
    throw ValidationError("unknown section id '" + id + "'");
}

RoutingInstance RoutingInstance::with_budget(std::optional<double> budget) const {
    RoutingInstance copy = *this;
    if (budget && (!std::isfinite(*budget) || *budget < 0.0)) {
        throw ValidationError("budget must be finite and >= 0");
    }
    copy.budget_ = budget;
    return copy;
}

RoutingInstance RoutingInstance::with_latency_sla(std::optional<double> latency_sla) const {
    RoutingInstance copy = *this;
    if (latency_sla && (!std::isfinite(*latency_sla) || *latency_sla < 0.0)) {
        throw ValidationError("latency_sla must be finite and >= 0");
    }
    copy.latency_sla_ = latency_sla;
    return copy;
}

RoutingInstance RoutingInstance::with_quality_floor(std::optional<double> quality_floor) const {
    RoutingInstance copy = *this;
    if (quality_floor && (!std::isfinite(*quality_floor) || *quality_floor < 0.0)) {
        throw ValidationError("quality_floor must be finite and >= 0");
    }
    copy.quality_floor_ = quality_floor;
    return copy;
}

RoutingInstance RoutingInstance::with_scores(ScoreMatrix scores) const {
    return RoutingInstance(models_, sections_, std::move(scores), budget_, latency_sla_,
                           quality_floor_);
}

std::vector<int> RoutingPlan::unassigned_sections() const {
    std::vector<int> out;
    for (int j = 0; j < static_cast<int>(assignment.size()); ++j) {
        if (assignment[j] == kUnassigned) out.push_back(j);
    }
    return out;
}

Eigen::VectorXd RoutingPlan::allocation_fractions(int num_models) const {
    Eigen::VectorXd fractions = Eigen::VectorXd::Zero(num_models);
    if (assignment.empty()) return fractions;
    for (int model : assignment) {
        if (model != kUnassigned) fractions(model) += 1.0;
    }
    return fractions / static_cast<double>(assignment.size());
}

double RoutingPlan::mean_score(int num_sections) const {
    return num_sections == 0 ? 0.0 : objective / static_cast<double>(num_sections);
}

RoutingPlan evaluate_assignment(const RoutingInstance& instance, std::vector<int> assignment) {
    const int n = instance.num_sections();
    const int k = instance.num_models();
    if (static_cast<int>(assignment.size()) != n) {
        throw StructuralError("assignment length does not match section count");
    }
    RoutingPlan plan;
    plan.per_model_latency = Eigen::VectorXd::Zero(k);
    for (int j = 0; j < n; ++j) {
        const int i = assignment[j];
        if (i == kUnassigned) {
            plan.feasible = false;
            continue;
        }
        if (i < 0 || i >= k) {
            throw StructuralError("assignment references model index " + std::to_string(i));
        }
        plan.total_cost += instance.costs()(j, i);
        plan.objective += instance.scores()(j, i);
        plan.per_model_latency(i) += instance.latencies()(j, i);
    }
    if (auto budget = instance.budget()) {
        if (*budget > 0.0) {
            plan.budget_violation_fraction = std::max(0.0, plan.total_cost / *budget - 1.0);
        } else if (plan.total_cost > kCurrencyTolerance) {
            plan.budget_violation_fraction = std::numeric_limits<double>::infinity();
        }
    }
    plan.assignment = std::move(assignment);
    return plan;
}

bool satisfies_latency(const RoutingInstance& instance, const RoutingPlan& plan) {
    const auto sla = instance.latency_sla();
    if (!sla) return true;
    const double slack = 1e-9 * std::max(1.0, *sla);
    return (plan.per_model_latency.array() <= *sla + slack).all();
}

double cheapest_assignment_cost(const RoutingInstance& instance) {
    double total = 0.0;
    for (int j = 0; j < instance.num_sections(); ++j) {
        total += instance.costs().row(j).minCoeff();
    }
    return total;
}

}  // namespace qcopt
