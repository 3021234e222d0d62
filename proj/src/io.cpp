#include "qcopt/io.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "qcopt/error.hpp"
#include "qcopt/quality.hpp"

namespace qcopt {
namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + " must be an object");
    for (auto& [key, _] : obj.items())
        if (!allowed.count(key)) throw ValidationError(where + ": unknown key \"" + key + "\"");
}

double number_field(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(where + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

std::optional<double> optional_number(const json& doc, const char* key) {
    if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
    if (!doc.at(key).is_number()) throw ValidationError(std::string("\"") + key + "\" must be a number or null");
    return doc.at(key).get<double>();
}

std::string string_field(const json& obj, const char* key, const std::string& where, bool required) {
    if (!obj.contains(key)) {
        if (required) throw ValidationError(where + ": missing \"" + key + "\"");
        return {};
    }
    if (!obj.at(key).is_string()) throw ValidationError(where + ": \"" + key + "\" must be a string");
    return obj.at(key).get<std::string>();
}

std::int64_t token_count(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ValidationError(where + " must be an integer token count");
    return v.get<std::int64_t>();
}

json optional_to_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

template <typename T>
T typed_field(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ValidationError(std::string("bench config: \"") + key + "\" has the wrong type");
    }
}

}  // namespace

ModelProfile parse_model_profile(const json& m, const std::string& where) {
    reject_unknown_keys(m,
                        {"id", "input_cost_per_token", "output_cost_per_token", "fixed_cost", "latency_per_token",
                         "avg_tokens_per_sentence", "tokenizer"},
                        where);
    ModelProfile p;
    p.id = string_field(m, "id", where, true);
    const std::string named = "model '" + p.id + "'";
    p.input_cost_per_token = number_field(m, "input_cost_per_token", 0.0, named);
    p.output_cost_per_token = number_field(m, "output_cost_per_token", 0.0, named);
    p.fixed_cost = number_field(m, "fixed_cost", 0.0, named);
    p.latency_per_token = number_field(m, "latency_per_token", 0.0, named);
    p.avg_tokens_per_sentence = number_field(m, "avg_tokens_per_sentence", 1.0, named);
    p.tokenizer_id = string_field(m, "tokenizer", named, false);
    return p;
}

BenchmarkConfig parse_bench_config(const json& doc) {
    reject_unknown_keys(doc,
                        {"seed", "n_sections", "models", "score_distribution", "min_tokens", "max_tokens",
                         "summary_sentences", "budget_fractions", "budgets", "baselines", "cascade_thresholds",
                         "latency_sla", "repair"},
                        "bench config");
    BenchmarkConfig cfg;
    cfg.seed = typed_field<std::uint64_t>(doc, "seed", cfg.seed);
    cfg.n_sections = typed_field<int>(doc, "n_sections", cfg.n_sections);
    if (doc.contains("models")) {
        if (!doc.at("models").is_array()) throw ValidationError("bench config: \"models\" must be an array");
        cfg.models.clear();
        for (const auto& m : doc.at("models"))
            cfg.models.push_back(parse_model_profile(m, "bench config model " + std::to_string(cfg.models.size())));
    }
    if (doc.contains("score_distribution")) {
        for (const auto& ab : doc.at("score_distribution")) {
            if (!ab.is_array() || ab.size() != 2 || !ab[0].is_number() || !ab[1].is_number())
                throw ValidationError("bench config: score_distribution entries must be [a, b]");
            cfg.score_distribution.push_back({ab[0].get<double>(), ab[1].get<double>()});
        }
    }
    cfg.min_tokens = typed_field<std::int64_t>(doc, "min_tokens", cfg.min_tokens);
    cfg.max_tokens = typed_field<std::int64_t>(doc, "max_tokens", cfg.max_tokens);
    cfg.summary_sentences = typed_field<int>(doc, "summary_sentences", cfg.summary_sentences);
    cfg.budget_fractions = typed_field<std::vector<double>>(doc, "budget_fractions", cfg.budget_fractions);
    cfg.budgets = typed_field<std::vector<double>>(doc, "budgets", cfg.budgets);
    if (doc.contains("baselines")) {
        cfg.single_model_baseline = cfg.random_baseline = cfg.cascade_baseline = false;
        for (const auto& name : typed_field<std::vector<std::string>>(doc, "baselines", {})) {
            if (name == "single-model")
                cfg.single_model_baseline = true;
            else if (name == "random")
                cfg.random_baseline = true;
            else if (name == "cascade")
                cfg.cascade_baseline = true;
            else
                throw ValidationError("bench config: unknown baseline '" + name + "'");
        }
    }
    cfg.cascade_thresholds = typed_field<std::vector<double>>(doc, "cascade_thresholds", cfg.cascade_thresholds);
    cfg.latency_sla = optional_number(doc, "latency_sla");
    cfg.repair_budget = typed_field<bool>(doc, "repair", cfg.repair_budget);
    cfg.validate();
    return cfg;
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": invalid JSON: " + e.what());
    }
}

RoutingInstance parse_instance(const json& doc, const InstanceLoadOptions& options) {
    reject_unknown_keys(doc, {"models", "sections", "scores", "budget", "latency_sla", "quality_floor"}, "instance");
    if (!doc.contains("models") || !doc.at("models").is_array())
        throw ValidationError("instance: \"models\" must be an array");
    if (!doc.contains("sections") || !doc.at("sections").is_array())
        throw ValidationError("instance: \"sections\" must be an array");

    std::vector<ModelProfile> models;
    for (const auto& m : doc.at("models")) models.push_back(parse_model_profile(m, "model " + std::to_string(models.size())));

    std::vector<Section> sections;
    for (const auto& s : doc.at("sections")) {
        const std::string where = "section " + std::to_string(sections.size());
        reject_unknown_keys(s, {"id", "text", "input_tokens", "summary_sentences"}, where);
        Section sec;
        sec.id = string_field(s, "id", where, true);
        const std::string named = "section '" + sec.id + "'";
        sec.text = string_field(s, "text", named, false);
        if (s.contains("summary_sentences")) {
            if (!s.at("summary_sentences").is_number_integer())
                throw ValidationError(named + ": \"summary_sentences\" must be an integer");
            sec.summary_sentences = s.at("summary_sentences").get<int>();
        }
        if (s.contains("input_tokens")) {
            const auto& t = s.at("input_tokens");
            if (t.is_object()) {
                for (auto& [model_id, count] : t.items())
                    sec.input_tokens_per_model[model_id] = token_count(count, named + " input_tokens." + model_id);
            } else {
                const auto count = token_count(t, named + " input_tokens");
                for (const auto& m : models) sec.input_tokens_per_model[m.id] = count;
            }
            for (const auto& [model_id, _] : sec.input_tokens_per_model) {
                bool known = false;
                for (const auto& m : models) known = known || m.id == model_id;
                if (!known) throw ValidationError(named + ": token count for unknown model '" + model_id + "'");
            }
        }
        for (const auto& m : models) {
            if (sec.input_tokens_per_model.count(m.id)) continue;
            if (!s.contains("text"))
                throw ValidationError(named + " has neither text nor a token count for model '" + m.id + "'");
            if (!options.vocabulary)
                throw ValidationError(named + " needs a vocabulary to count its text for model '" + m.id + "'");
            sec.input_tokens_per_model[m.id] =
                static_cast<std::int64_t>(count_tokens(sec.text, options.vocabulary(m.tokenizer_id)));
        }
        sections.push_back(std::move(sec));
    }

    const auto n = static_cast<Eigen::Index>(sections.size());
    const auto k = static_cast<Eigen::Index>(models.size());
    ScoreMatrix scores;
    if (options.score_file) {
        scores = ScoreTable::read(*options.score_file).to_matrix(sections, models);
    } else if (options.scores) {
        scores = *options.scores;
    } else {
        if (!doc.contains("scores")) throw ValidationError("instance has no \"scores\" and no score file was given");
        const auto& rows = doc.at("scores");
        if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n)
            throw ValidationError("\"scores\" must have one row per section (" + std::to_string(n) + ")");
        scores.resize(n, k);
        for (Eigen::Index j = 0; j < n; ++j) {
            const auto& row = rows.at(static_cast<std::size_t>(j));
            const std::string& sid = sections[static_cast<std::size_t>(j)].id;
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != k)
                throw ValidationError("scores row for section '" + sid + "' must have " + std::to_string(k) +
                                      " entries");
            for (Eigen::Index i = 0; i < k; ++i) {
                const auto& cell = row.at(static_cast<std::size_t>(i));
                const std::string& mid = models[static_cast<std::size_t>(i)].id;
                const std::string cell_name = "section '" + sid + "', model '" + mid + "'";
                if (!cell.is_number())
                    throw ScoreRangeError("score for " + cell_name + " is not a number", sid, mid);
                scores(j, i) = cell.get<double>();
                if (!(scores(j, i) >= 0.0 && scores(j, i) <= 1.0))
                    throw ScoreRangeError("score for " + cell_name + " is " + cell.dump() + ", outside [0,1]", sid,
                                          mid);
            }
        }
    }

    return RoutingInstance(std::move(models), std::move(sections), std::move(scores), optional_number(doc, "budget"),
                           optional_number(doc, "latency_sla"), optional_number(doc, "quality_floor"));
}

RoutingInstance load_instance(const std::filesystem::path& path, const InstanceLoadOptions& options) {
    auto doc = read_json_file(path);
    try {
        return parse_instance(doc, options);
    } catch (const ScoreFileError&) {
        throw;
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

json instance_to_json(const RoutingInstance& instance) {
    json doc;
    doc["models"] = json::array();
    for (const auto& m : instance.models()) {
        json jm = {{"id", m.id},
                   {"input_cost_per_token", m.input_cost_per_token},
                   {"output_cost_per_token", m.output_cost_per_token},
                   {"fixed_cost", m.fixed_cost},
                   {"latency_per_token", m.latency_per_token},
                   {"avg_tokens_per_sentence", m.avg_tokens_per_sentence}};
        if (!m.tokenizer_id.empty()) jm["tokenizer"] = m.tokenizer_id;
        doc["models"].push_back(std::move(jm));
    }
    doc["sections"] = json::array();
    for (const auto& s : instance.sections()) {
        json js = {{"id", s.id}, {"summary_sentences", s.summary_sentences}};
        if (!s.text.empty()) js["text"] = s.text;
        js["input_tokens"] = json::object();
        for (const auto& [model_id, count] : s.input_tokens_per_model) js["input_tokens"][model_id] = count;
        doc["sections"].push_back(std::move(js));
    }
    doc["scores"] = json::array();
    for (Eigen::Index j = 0; j < instance.scores().rows(); ++j) {
        json row = json::array();
        for (Eigen::Index i = 0; i < instance.scores().cols(); ++i) row.push_back(instance.scores()(j, i));
        doc["scores"].push_back(std::move(row));
    }
    doc["budget"] = optional_to_json(instance.budget());
    doc["latency_sla"] = optional_to_json(instance.latency_sla());
    doc["quality_floor"] = optional_to_json(instance.quality_floor());
    return doc;
}

json plan_to_json(const RoutingInstance& instance, const RoutingPlan& plan) {
    const auto& models = instance.models();
    const auto& sections = instance.sections();
    json out;
    out["assignment"] = json::object();
    for (std::size_t j = 0; j < plan.assignment.size(); ++j) {
        const int i = plan.assignment[j];
        out["assignment"][sections[j].id] = i == kUnassigned ? json(nullptr) : json(models[i].id);
    }
    out["total_cost"] = plan.total_cost;
    out["objective"] = plan.objective;
    out["lp_objective"] = optional_to_json(plan.lp_objective);
    out["budget_violation_fraction"] = plan.budget_violation_fraction;
    out["per_model_latency"] = json::object();
    out["allocation_fractions"] = json::object();
    const Eigen::VectorXd fractions = plan.allocation_fractions(instance.num_models());
    for (int i = 0; i < instance.num_models(); ++i) {
        out["per_model_latency"][models[i].id] = plan.per_model_latency.size() > i ? plan.per_model_latency(i) : 0.0;
        out["allocation_fractions"][models[i].id] = fractions(i);
    }
    out["feasible"] = plan.feasible;
    out["unassigned_sections"] = json::array();
    for (int j : plan.unassigned_sections()) out["unassigned_sections"].push_back(sections[j].id);
    out["mean_score"] = plan.mean_score(instance.num_sections());
    return out;
}

json passage_report_to_json(const PassageReport& report) {
    auto codes = [](const std::vector<Heuristic>& hs) {
        json a = json::array();
        for (Heuristic h : hs) a.push_back(std::string(heuristic_code(h)));
        return a;
    };
    json out;
    out["compressed"] = report.compressed;
    out["tokens_before"] = report.tokens_before;
    out["tokens_after"] = report.tokens_after;
    out["tokens_saved"] = report.tokens_saved();
    out["compression"] = report.compression();
    out["passage_tokens_before"] = report.passage_tokens_before;
    out["passage_tokens_after"] = report.passage_tokens_after;
    out["quality_loss"] = report.quality_loss;
    out["sentences"] = json::array();
    for (const auto& s : report.sentences) {
        json js = {{"index", s.index},
                   {"original", s.original},
                   {"compressed", s.compressed},
                   {"tokens_before", s.tokens_before},
                   {"tokens_after", s.tokens_after},
                   {"tokens_saved", s.tokens_before - s.tokens_after},
                   {"capacity", std::isfinite(s.capacity) ? json(s.capacity) : json(nullptr)},
                   {"quality_loss", s.quality_loss},
                   {"selected", codes(s.selected)},
                   {"order", codes(s.order)}};
        js["edits"] = json::array();
        for (const auto& e : s.edits)
            js["edits"].push_back({{"heuristic", std::string(heuristic_code(e.heuristic))},
                                   {"tokens_saved", e.tokens_saved},
                                   {"quality_loss", e.quality_loss}});
        out["sentences"].push_back(std::move(js));
    }
    return out;
}

}  // namespace qcopt
