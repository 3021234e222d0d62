#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qcopt/core.hpp"
#include "qcopt/tokenizer.hpp"

namespace qcopt::test {

inline std::filesystem::path data_dir() { return QCOPT_DATA_DIR; }

inline const TokenVocabulary& cl100k() {
    static const TokenVocabulary vocab = load_vocabulary(default_vocabulary_path());
    return vocab;
}

// Rates are multiples of 2^-10 and token counts are small integers, so every
// cost and latency below is exact in double and sums compare with ==.
struct InstanceShape {
    int sections = 4;
    int models = 3;
    bool uniform_tokens = false;  // same input + output size for every (section, model)
    bool latency = false;
};

inline RoutingInstance random_instance(std::mt19937_64& rng, const InstanceShape& shape) {
    auto dyadic = [&](int lo, int hi) {
        return std::uniform_int_distribution<int>(lo, hi)(rng) / 1024.0;
    };
    std::uniform_int_distribution<int> sentences(1, 5);
    std::vector<ModelProfile> models;
    for (int i = 0; i < shape.models; ++i) {
        ModelProfile m;
        m.id = "m" + std::to_string(i);
        m.input_cost_per_token = dyadic(1, 16);
        m.output_cost_per_token = dyadic(1, 16);
        m.fixed_cost = dyadic(0, 64);
        m.latency_per_token = dyadic(1, 8);
        m.avg_tokens_per_sentence = std::uniform_int_distribution<int>(2, 6)(rng);
        models.push_back(m);
    }
    const std::int64_t d = 400;
    std::vector<Section> sections;
    for (int j = 0; j < shape.sections; ++j) {
        Section s;
        s.id = "s" + std::to_string(j);
        s.summary_sentences = sentences(rng);
        for (const auto& m : models) {
            if (shape.uniform_tokens) {
                s.input_tokens_per_model[m.id] = d - estimated_output_tokens(s, m);
            } else {
                s.input_tokens_per_model[m.id] = std::uniform_int_distribution<int>(20, 300)(rng);
            }
        }
        sections.push_back(s);
    }
    ScoreMatrix scores(shape.sections, shape.models);
    std::uniform_int_distribution<int> pct(0, 100);
    for (int j = 0; j < shape.sections; ++j)
        for (int i = 0; i < shape.models; ++i) scores(j, i) = pct(rng) / 100.0;

    std::optional<double> sla;
    if (shape.latency) {
        // Room for roughly half the sections on any one model, as a dyadic value.
        double max_rate = 0;
        for (const auto& m : models) max_rate = std::max(max_rate, m.latency_per_token);
        const int room = std::uniform_int_distribution<int>(1, std::max(1, shape.sections))(rng);
        sla = max_rate * static_cast<double>(d) * room;
    }
    return RoutingInstance(models, sections, scores, std::nullopt, sla, std::nullopt);
}

// Costs and latencies recomputed from the profiles, not read from the instance.
struct RawCosts {
    std::vector<std::vector<double>> cost;     // [section][model]
    std::vector<std::vector<double>> latency;  // [section][model]
};

inline RawCosts raw_costs(const RoutingInstance& inst) {
    RawCosts raw;
    for (const auto& s : inst.sections()) {
        auto& c = raw.cost.emplace_back();
        auto& l = raw.latency.emplace_back();
        for (const auto& m : inst.models()) {
            const double in = static_cast<double>(s.input_tokens_per_model.at(m.id));
            const double out = std::ceil(s.summary_sentences * m.avg_tokens_per_sentence);
            c.push_back(m.input_cost_per_token * in + m.output_cost_per_token * out + m.fixed_cost);
            l.push_back(m.latency_per_token * (in + out));
        }
    }
    return raw;
}

// Calls f(assignment) for every assignment in lexicographic order.
template <typename F>
void for_each_assignment(int n, int k, F&& f) {
    std::vector<int> a(n, 0);
    if (k == 0 && n > 0) return;
    for (;;) {
        f(a);
        int j = n - 1;
        while (j >= 0 && ++a[j] == k) a[j--] = 0;
        if (j < 0) return;
    }
}

struct OracleResult {
    bool feasible = false;
    double value = 0.0;  // objective for budget-opt, cost for cost-min
    std::vector<int> assignment;
};

inline bool within_latency(const RoutingInstance& inst, const RawCosts& raw, const std::vector<int>& a) {
    if (!inst.latency_sla()) return true;
    std::vector<double> load(inst.num_models(), 0.0);
    for (std::size_t j = 0; j < a.size(); ++j) load[a[j]] += raw.latency[j][a[j]];
    for (double l : load)
        if (l > *inst.latency_sla() + 1e-9) return false;
    return true;
}

inline OracleResult brute_force_budget_opt(const RoutingInstance& inst) {
    const auto raw = raw_costs(inst);
    OracleResult best;
    for_each_assignment(inst.num_sections(), inst.num_models(), [&](const std::vector<int>& a) {
        double cost = 0, score = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            cost += raw.cost[j][a[j]];
            score += inst.scores()(static_cast<Eigen::Index>(j), a[j]);
        }
        if (inst.budget() && cost > *inst.budget() + 1e-9) return;
        if (!within_latency(inst, raw, a)) return;
        if (!best.feasible || score > best.value) best = {true, score, a};
    });
    return best;
}

inline OracleResult brute_force_cost_min(const RoutingInstance& inst) {
    const auto raw = raw_costs(inst);
    const double floor = inst.quality_floor().value_or(0.0);
    OracleResult best;
    for_each_assignment(inst.num_sections(), inst.num_models(), [&](const std::vector<int>& a) {
        double cost = 0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            if (inst.scores()(static_cast<Eigen::Index>(j), a[j]) < floor) return;
            cost += raw.cost[j][a[j]];
        }
        if (!within_latency(inst, raw, a)) return;
        if (!best.feasible || cost < best.value) best = {true, cost, a};
    });
    return best;
}

inline double plan_cost(const RawCosts& raw, const std::vector<int>& a) {
    double cost = 0;
    for (std::size_t j = 0; j < a.size(); ++j) cost += raw.cost[j][a[j]];
    return cost;
}

// Sentences mixing material every heuristic can act on: stop words, listed
// synonyms and prefixes, hyphens, parentheses, acronyms, digits, punctuation.
inline std::string fuzz_sentence(std::mt19937_64& rng) {
    static const std::vector<std::string> pool = {
        "the", "a", "an", "very", "really", "just", "quite", "The", "A", "Very",
        "approximately", "additional", "commence", "assistance", "Utilize", "utilize", "demonstrate",
        "running", "organizations", "happily", "studies", "generalizations", "connected", "hopeful",
        "nonlinear", "preexisting", "multicolor", "underestimate", "reorganize", "antibody",
        "well-known", "state-of-the-art", "long-term", "x-ray",
        "(briefly)", "(see", "above)", "(", ")", "()",
        "U.S.A.", "N.A.S.A.", "E.U.", "U.K.", "e.g.", "i.e.", "Mr.",
        "3.5", "1,000", "2:30", "10;", "item,", "note:", "\"quoted\"", "list;", "end.",
        "cat", "sat", "on", "mat", "model", "budget", "quality", "token", "section", "router",
        "café", "naïve", "日本", "42", "x2y", "don't", "it's", "\xe2\x80\x94", "...", "!", "?", "$5", "%",
    };
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> len(1, 18), sep(0, 9);
    std::string out;
    const int n = len(rng);
    for (int w = 0; w < n; ++w) {
        if (w > 0) out += sep(rng) == 0 ? "  " : (sep(rng) == 1 ? ", " : " ");
        out += pool[pick(rng)];
    }
    if (sep(rng) < 7) out += ".";
    return out;
}

}  // namespace qcopt::test
