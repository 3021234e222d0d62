// qcopt command-line entry point.
//
// Exit codes: 0 success, 1 infeasible problem, 2 invalid input or usage,
// 3 internal solver failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "qcopt/bench.hpp"
#include "qcopt/budget_opt.hpp"
#include "qcopt/cost_min.hpp"
#include "qcopt/error.hpp"
#include "qcopt/io.hpp"
#include "qcopt/token_opt.hpp"

namespace {

using nlohmann::json;

struct Common {
    std::string instance;
    std::string scores;
    std::string vocab;
    std::string report;
    std::optional<double> budget;
    std::optional<double> quality_floor;
    std::optional<double> latency_sla;
};

class VocabularyCache {
public:
    explicit VocabularyCache(std::string path) : path_(std::move(path)) {}

    const qcopt::TokenVocabulary& get() {
        if (!vocab_) vocab_ = std::make_unique<qcopt::TokenVocabulary>(
                         qcopt::load_vocabulary(qcopt::default_vocabulary_path(path_)));
        return *vocab_;
    }

    const qcopt::TokenVocabulary& for_tokenizer(const std::string& tokenizer_id) {
        const auto& v = get();
        if (!tokenizer_id.empty() && tokenizer_id != v.name())
            throw qcopt::ValidationError("no vocabulary loaded for tokenizer '" + tokenizer_id + "' (loaded '" +
                                         v.name() + "'); pass --vocab");
        return v;
    }

private:
    std::string path_;
    std::unique_ptr<qcopt::TokenVocabulary> vocab_;
};

qcopt::RoutingInstance load(const Common& c, VocabularyCache& vocab) {
    qcopt::InstanceLoadOptions opts;
    opts.vocabulary = [&vocab](const std::string& id) -> const qcopt::TokenVocabulary& {
        return vocab.for_tokenizer(id);
    };
    if (!c.scores.empty()) opts.score_file = c.scores;
    auto instance = qcopt::load_instance(c.instance, opts);
    if (c.budget) instance = instance.with_budget(c.budget);
    if (c.quality_floor) instance = instance.with_quality_floor(c.quality_floor);
    if (c.latency_sla) instance = instance.with_latency_sla(c.latency_sla);
    return instance;
}

void emit(const json& doc, const std::string& report_path) {
    const std::string text = doc.dump(2) + "\n";
    if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::binary);
        if (!out) throw qcopt::ValidationError("cannot write " + report_path);
        out << text;
    }
    std::cout << text;
}

std::string read_text(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qcopt::ValidationError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<qcopt::Heuristic> parse_heuristic_list(const std::vector<std::string>& codes) {
    std::vector<qcopt::Heuristic> out;
    for (const auto& c : codes) out.push_back(qcopt::parse_heuristic(c));
    return out;
}

void add_instance_options(CLI::App* cmd, Common& c) {
    cmd->add_option("--instance", c.instance, "Instance JSON file")->required();
    cmd->add_option("--scores", c.scores, "Score file (.json or .csv) replacing the instance's scores");
    cmd->add_option("--vocab", c.vocab, "Vocabulary for sections given as text");
    cmd->add_option("--latency-sla", c.latency_sla, "Per-model latency limit in seconds");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quality-aware LLM routing and prompt token reduction"};
    app.require_subcommand(1);

    Common common;
    bool repair = false;
    std::string mode = "auto";

    auto* route = app.add_subcommand("route", "Assign sections to models");
    route->require_subcommand(1);
    auto* budget_opt = route->add_subcommand("budget-opt", "Maximize total score within a budget");
    add_instance_options(budget_opt, common);
    budget_opt->add_option("--budget", common.budget, "Budget (overrides the instance)");
    budget_opt->add_flag("--repair", repair, "Demote sections until the rounded plan fits the budget");
    budget_opt->add_option("--report", common.report, "Also write the plan JSON here");
    auto* cost_min = route->add_subcommand("cost-min", "Minimize cost subject to a per-section quality floor");
    add_instance_options(cost_min, common);
    cost_min->add_option("--quality-floor", common.quality_floor, "Quality floor (overrides the instance)");
    cost_min->add_option("--mode", mode, "auto | greedy | flow | oracle | heuristic")->capture_default_str();
    cost_min->add_option("--report", common.report, "Also write the plan JSON here");

    auto* validate = app.add_subcommand("validate", "Check an instance file");
    add_instance_options(validate, common);

    std::string input = "-";
    std::optional<double> loss_budget;
    std::optional<double> loss_fraction;
    std::vector<std::string> enable, disable;
    std::string dict_dir, loss_weights;
    auto* trim = app.add_subcommand("trim", "Reduce the token count of a passage");
    trim->add_option("--input", input, "Text file, or - for stdin")->capture_default_str();
    auto* budget_flag = trim->add_option("--loss-budget", loss_budget, "Per-sentence loss capacity C (default: no limit)");
    trim->add_option("--loss-fraction", loss_fraction, "Capacity as a fraction of each sentence's full loss")
        ->excludes(budget_flag);
    trim->add_option("--enable", enable, "Only these heuristics (CS,RS,LS,RB,HC,RSW,RP,RA)")->delimiter(',');
    trim->add_option("--disable", disable, "Heuristics to turn off")->delimiter(',');
    trim->add_option("--vocab", common.vocab, "Vocabulary file");
    trim->add_option("--dict", dict_dir, "Dictionary directory (default: bundled)");
    trim->add_option("--loss-weights", loss_weights, "JSON object of per-heuristic loss weights");
    trim->add_option("--report", common.report, "Write the per-sentence JSON report here");

    std::uint64_t seed = 7;
    int seeds = 1;
    std::optional<int> sections;
    std::string config;
    bool with_reports = false;
    auto* bench = app.add_subcommand("bench", "Synthetic budget sweep against baselines");
    bench->add_option("--seed", seed, "First seed")->capture_default_str();
    bench->add_option("--seeds", seeds, "Number of consecutive seeds")->capture_default_str();
    bench->add_option("--sections", sections, "Sections per instance");
    bench->add_option("--config", config, "Benchmark config JSON");
    bench->add_flag("--per-seed", with_reports, "Include every seed's full report");
    bench->add_option("--report", common.report, "Also write the report JSON here");

    double ratio = 0.0, similarity = 0.0;
    std::string tag_text;
    auto* tags = app.add_subcommand("tags", "Control tags for an external simplification model");
    tags->add_option("--ratio", ratio, "Target NUM_TOKENS_RATIO in (0, 1]")->required();
    tags->add_option("--similarity", similarity, "Target BERTSCORE in [0, 1]")->required();
    tags->add_option("--text", tag_text, "Source text to prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        VocabularyCache vocab(common.vocab);
        if (*budget_opt) {
            const auto instance = load(common, vocab);
            const auto plan = qcopt::solve_budget_opt(instance, qcopt::BudgetOptOptions{repair});
            emit(qcopt::plan_to_json(instance, plan), common.report);
        } else if (*cost_min) {
            const auto instance = load(common, vocab);
            const auto plan = qcopt::solve_cost_min(instance, qcopt::parse_cost_min_mode(mode));
            emit(qcopt::plan_to_json(instance, plan), common.report);
            if (!plan.feasible) return 1;
        } else if (*validate) {
            const auto instance = load(common, vocab);
            std::cout << "ok: " << instance.num_sections() << " sections, " << instance.num_models() << " models\n";
        } else if (*trim) {
            qcopt::CompressionOptions opts;
            if (loss_budget) opts.budget.capacity = *loss_budget;
            opts.fraction_of_full = loss_fraction;
            if (!enable.empty()) opts.enabled = parse_heuristic_list(enable);
            for (auto h : parse_heuristic_list(disable))
                opts.enabled.erase(std::remove(opts.enabled.begin(), opts.enabled.end(), h), opts.enabled.end());
            const qcopt::TextResources resources = dict_dir.empty()
                                                       ? qcopt::TextResources::bundled()
                                                       : qcopt::TextResources::load(dict_dir);
            const qcopt::StaticLossEstimator estimator = loss_weights.empty()
                                                             ? qcopt::StaticLossEstimator()
                                                             : qcopt::StaticLossEstimator::from_json_file(loss_weights);
            const auto report =
                qcopt::compress_passage(read_text(input), opts, vocab.get(), estimator, resources);
            if (!common.report.empty()) {
                std::ofstream out(common.report, std::ios::binary);
                if (!out) throw qcopt::ValidationError("cannot write " + common.report);
                out << qcopt::passage_report_to_json(report).dump(2) << "\n";
            }
            std::cout << report.compressed;
            std::cerr << "tokens " << report.tokens_before << " -> " << report.tokens_after << " ("
                      << 100.0 * report.compression() << "% saved)\n";
        } else if (*bench) {
            qcopt::BenchmarkConfig cfg =
                config.empty() ? qcopt::BenchmarkConfig{} : qcopt::parse_bench_config(qcopt::read_json_file(config));
            if (bench->count("--seed") || config.empty()) cfg.seed = seed;
            if (sections) cfg.n_sections = *sections;
            if (seeds == 1) {
                emit(qcopt::report_to_json(qcopt::run_budget_sweep(cfg)), common.report);
            } else {
                emit(qcopt::summary_to_json(qcopt::run_seed_sweep(cfg, seeds), with_reports), common.report);
            }
        } else if (*tags) {
            std::cout << (tag_text.empty() ? qcopt::control_tags(ratio, similarity)
                                           : qcopt::format_control_tags(tag_text, ratio, similarity))
                      << "\n";
        }
    } catch (const qcopt::InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 1;
    } catch (const qcopt::ValidationError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const qcopt::PreconditionError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const qcopt::InstanceTooLargeError& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const qcopt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
