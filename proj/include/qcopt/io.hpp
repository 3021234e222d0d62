#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "qcopt/bench.hpp"
#include "qcopt/core.hpp"
#include "qcopt/tokenizer.hpp"
#include "qcopt/token_opt.hpp"

namespace qcopt {

/// Maps a model's tokenizer id to the vocabulary used to count section text.
using VocabularyResolver = std::function<const TokenVocabulary&(const std::string& tokenizer_id)>;

struct InstanceLoadOptions {
    /// Needed only when a section gives text instead of token counts.
    VocabularyResolver vocabulary;
    /// Replaces the file's "scores".
    std::optional<ScoreMatrix> scores;
    /// Score file (JSON or CSV, see ScoreTable) replacing the file's "scores".
    std::optional<std::filesystem::path> score_file;
};

/// Instance document:
/// {
///   "models": [{"id", "input_cost_per_token", "output_cost_per_token",
///               "fixed_cost", "latency_per_token", "avg_tokens_per_sentence",
///               "tokenizer"}],
///   "sections": [{"id", "text", "input_tokens": {model: n} | n,
///                 "summary_sentences"}],
///   "scores": [[S_11, ..., S_1K], ...],   // one row per section
///   "budget": B | null, "latency_sla": L | null, "quality_floor": Q | null
/// }
/// Unknown keys at any level are rejected.
RoutingInstance parse_instance(const nlohmann::json& doc, const InstanceLoadOptions& options = {});
RoutingInstance load_instance(const std::filesystem::path& path, const InstanceLoadOptions& options = {});

/// Writes every section with explicit token counts, so the result reloads
/// without a vocabulary.
nlohmann::json instance_to_json(const RoutingInstance& instance);

/// assignment (section id -> model id or null), total_cost, objective,
/// lp_objective, budget_violation_fraction, per_model_latency, feasible,
/// unassigned_sections, allocation_fractions, mean_score.
nlohmann::json plan_to_json(const RoutingInstance& instance, const RoutingPlan& plan);

/// Per-sentence records plus passage totals.
nlohmann::json passage_report_to_json(const PassageReport& report);

/// One entry of an instance's "models" array.
ModelProfile parse_model_profile(const nlohmann::json& obj, const std::string& where);

/// Benchmark config document; every key is optional and defaults to
/// BenchmarkConfig's defaults:
/// {"seed", "n_sections", "models": [...], "score_distribution": [[a, b], ...],
///  "min_tokens", "max_tokens", "summary_sentences", "budget_fractions",
///  "budgets", "baselines": ["single-model", "random", "cascade"],
///  "cascade_thresholds", "latency_sla", "repair"}
BenchmarkConfig parse_bench_config(const nlohmann::json& doc);

/// Parses a file as JSON; ValidationError names the file on failure.
nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace qcopt
