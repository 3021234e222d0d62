#include "qcopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <random>

#include "qcopt/budget_opt.hpp"
#include "qcopt/error.hpp"

namespace qcopt {
namespace {

double beta_draw(std::mt19937_64& rng, const BetaParams& p) {
    std::gamma_distribution<double> ga(p.a, 1.0);
    std::gamma_distribution<double> gb(p.b, 1.0);
    const double x = ga(rng);
    const double y = gb(rng);
    return x + y > 0.0 ? x / (x + y) : 0.5;
}

// Deterministic per-purpose stream derived from the run seed.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    return std::mt19937_64(seq);
}

std::vector<int> random_assignment_like(const RoutingPlan& plan, int num_models, std::mt19937_64& rng) {
    std::vector<int> labels;
    std::vector<int> counts(static_cast<std::size_t>(num_models), 0);
    for (int i : plan.assignment)
        if (i != kUnassigned) ++counts[static_cast<std::size_t>(i)];
    for (int i = 0; i < num_models; ++i) labels.insert(labels.end(), counts[static_cast<std::size_t>(i)], i);
    std::shuffle(labels.begin(), labels.end(), rng);
    return labels;
}

// Smallest budget in [lo, hi] whose rounded plan reaches `target` total score.
std::optional<RoutingPlan> match_score(const RoutingInstance& instance, double target, double lo, double hi,
                                       bool repair, double& budget_out) {
    BudgetOptOptions opts{repair};
    auto reaches = [&](double b, RoutingPlan& plan) {
        try {
            plan = solve_budget_opt(instance.with_budget(b), opts);
        } catch (const Error&) {
            return false;
        }
        return plan.objective >= target - 1e-9;
    };
    RoutingPlan best;
    if (reaches(lo, best)) {
        budget_out = lo;
        return best;
    }
    if (!reaches(hi, best)) return std::nullopt;
    for (int iter = 0; iter < 40 && hi - lo > 1e-9 * std::max(1.0, hi); ++iter) {
        const double mid = 0.5 * (lo + hi);
        RoutingPlan plan;
        if (reaches(mid, plan)) {
            hi = mid;
            best = std::move(plan);
        } else {
            lo = mid;
        }
    }
    budget_out = hi;
    return best;
}

}  // namespace

std::vector<ModelProfile> reference_models() {
    auto make = [](std::string id, double in_per_1k, double out_per_1k, double call_seconds) {
        ModelProfile m;
        m.id = std::move(id);
        m.input_cost_per_token = in_per_1k / 1000.0;
        m.output_cost_per_token = out_per_1k / 1000.0;
        m.latency_per_token = call_seconds / kLatencyReferenceTokens;
        m.avg_tokens_per_sentence = 20.0;
        m.tokenizer_id = "cl100k_base";
        return m;
    };
    return {make("gpt-3.5-turbo", 0.0015, 0.002, kTurboCallSeconds),
            make("text-davinci-003", 0.02, 0.02, kDavinciCallSeconds),
            make("text-curie-001", 0.002, 0.002, kCurieCallSeconds)};
}

std::vector<BetaParams> default_score_distribution() { return {{38.0, 12.0}, {37.5, 12.5}, {35.0, 15.0}}; }

void BenchmarkConfig::validate() const {
    if (n_sections < 0) throw ValidationError("n_sections must be >= 0");
    if (models.empty()) throw ValidationError("at least one model is required");
    for (const auto& m : models) m.validate();
    const auto& dist = score_distribution.empty() ? default_score_distribution() : score_distribution;
    if (dist.size() < models.size())
        throw ValidationError("score_distribution needs one Beta per model (" + std::to_string(models.size()) + ")");
    for (const auto& p : dist)
        if (!(p.a > 0.0) || !(p.b > 0.0) || !std::isfinite(p.a) || !std::isfinite(p.b))
            throw ValidationError("Beta parameters must be finite and > 0");
    if (min_tokens < 0 || max_tokens < min_tokens) throw ValidationError("token range must satisfy 0 <= min <= max");
    if (summary_sentences < 1) throw ValidationError("summary_sentences must be >= 1");
    for (double f : budget_fractions)
        if (!std::isfinite(f) || f < 0.0) throw ValidationError("budget fractions must be finite and >= 0");
    for (double b : budgets)
        if (!std::isfinite(b) || b < 0.0) throw ValidationError("budgets must be finite and >= 0");
    for (double t : cascade_thresholds)
        if (!std::isfinite(t) || t < 0.0 || t > 1.0) throw ValidationError("cascade thresholds must be in [0, 1]");
    if (latency_sla && (!std::isfinite(*latency_sla) || *latency_sla < 0.0))
        throw ValidationError("latency_sla must be finite and >= 0");
}

RoutingInstance generate_instance(const BenchmarkConfig& cfg) {
    cfg.validate();
    const auto dist = cfg.score_distribution.empty() ? default_score_distribution() : cfg.score_distribution;
    const int k = static_cast<int>(cfg.models.size());
    auto rng = stream(cfg.seed, 0);
    std::uniform_int_distribution<std::int64_t> length(cfg.min_tokens, cfg.max_tokens);
    std::vector<Section> sections;
    ScoreMatrix scores(cfg.n_sections, k);
    for (int j = 0; j < cfg.n_sections; ++j) {
        Section s;
        s.id = "s" + std::to_string(j);
        s.summary_sentences = cfg.summary_sentences;
        const std::int64_t tokens = length(rng);
        for (const auto& m : cfg.models) s.input_tokens_per_model[m.id] = tokens;
        for (int i = 0; i < k; ++i) scores(j, i) = beta_draw(rng, dist[static_cast<std::size_t>(i)]);
        sections.push_back(std::move(s));
    }
    return RoutingInstance(cfg.models, std::move(sections), std::move(scores), std::nullopt, cfg.latency_sla);
}

std::vector<int> best_score_assignment(const RoutingInstance& instance) {
    std::vector<int> out(static_cast<std::size_t>(instance.num_sections()));
    for (int j = 0; j < instance.num_sections(); ++j) {
        int best = 0;
        for (int i = 1; i < instance.num_models(); ++i) {
            const double s = instance.scores()(j, i);
            const double sb = instance.scores()(j, best);
            if (s > sb || (s == sb && instance.costs()(j, i) < instance.costs()(j, best))) best = i;
        }
        out[static_cast<std::size_t>(j)] = best;
    }
    return out;
}

CascadeRow run_cascade(const RoutingInstance& instance, double threshold) {
    const int n = instance.num_sections();
    const int k = instance.num_models();
    std::vector<int> order(static_cast<std::size_t>(k));
    std::iota(order.begin(), order.end(), 0);
    const Eigen::VectorXd mean_cost = n > 0 ? Eigen::VectorXd(instance.costs().colwise().mean().transpose())
                                            : Eigen::VectorXd::Zero(k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return mean_cost(a) < mean_cost(b); });

    CascadeRow row;
    row.threshold = threshold;
    double score_sum = 0.0;
    std::size_t calls = 0;
    for (int j = 0; j < n; ++j) {
        double score = 0.0;
        for (int i : order) {
            row.cost += instance.costs()(j, i);
            score = instance.scores()(j, i);
            ++calls;
            if (score >= threshold) break;
        }
        score_sum += score;
    }
    if (n > 0) {
        row.mean_score = score_sum / n;
        row.calls_per_section = static_cast<double>(calls) / n;
    }
    return row;
}

BenchmarkReport run_budget_sweep(const BenchmarkConfig& cfg) {
    const RoutingInstance instance = generate_instance(cfg);
    const int n = instance.num_sections();
    const int k = instance.num_models();

    BenchmarkReport report;
    report.seed = cfg.seed;
    report.n_sections = n;
    for (const auto& m : instance.models()) report.model_ids.push_back(m.id);
    report.cheapest_cost = cheapest_assignment_cost(instance);
    report.best_score_cost = evaluate_assignment(instance, best_score_assignment(instance)).total_cost;

    std::vector<std::pair<double, std::optional<double>>> budgets;
    if (!cfg.budgets.empty()) {
        for (double b : cfg.budgets) budgets.emplace_back(b, std::nullopt);
    } else {
        const double span = std::max(0.0, report.best_score_cost - report.cheapest_cost);
        for (double f : cfg.budget_fractions) budgets.emplace_back(report.cheapest_cost + f * span, f);
    }
    std::stable_sort(budgets.begin(), budgets.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    // Points are independent (each has its own random stream), so they are
    // solved concurrently and collected in budget order.
    const BudgetOptOptions opts{cfg.repair_budget};
    auto solve_point = [&](std::size_t p) {
        BudgetPoint point;
        point.budget = budgets[p].first;
        point.fraction = budgets[p].second;
        point.allocation = Eigen::VectorXd::Zero(k);
        try {
            const RoutingInstance at_budget = instance.with_budget(point.budget);
            const RoutingPlan plan = solve_budget_opt(at_budget, opts);
            point.cost = plan.total_cost;
            point.objective = plan.objective;
            point.mean_score = plan.mean_score(n);
            point.lp_objective = plan.lp_objective.value_or(plan.objective);
            point.budget_violation_fraction = plan.budget_violation_fraction;
            point.allocation = plan.allocation_fractions(k);
            if (cfg.random_baseline) {
                auto rng = stream(cfg.seed, 1000 + p);
                const RoutingPlan random = evaluate_assignment(at_budget, random_assignment_like(plan, k, rng));
                point.random_cost = random.total_cost;
                point.random_mean_score = random.mean_score(n);
            }
        } catch (const Error& e) {
            point.error = e.what();
        }
        return point;
    };
    std::vector<std::future<BudgetPoint>> pending;
    for (std::size_t p = 0; p < budgets.size(); ++p) pending.push_back(std::async(std::launch::async, solve_point, p));
    std::size_t solved = 0;
    for (auto& f : pending) {
        BudgetPoint point = f.get();
        if (point.error.empty()) {
            report.mean_violation += point.budget_violation_fraction;
            report.max_violation = std::max(report.max_violation, point.budget_violation_fraction);
            ++solved;
        }
        report.points.push_back(std::move(point));
    }
    if (solved > 0) report.mean_violation /= static_cast<double>(solved);

    if (cfg.single_model_baseline) {
        for (int i = 0; i < k; ++i) {
            const RoutingPlan plan = evaluate_assignment(instance, std::vector<int>(static_cast<std::size_t>(n), i));
            report.single_model.push_back({instance.models()[static_cast<std::size_t>(i)].id, plan.total_cost,
                                           plan.mean_score(n)});
        }
    }
    if (cfg.cascade_baseline && n > 0) {
        for (double t : cfg.cascade_thresholds) {
            CascadeRow row = run_cascade(instance, t);
            double budget = 0.0;
            auto plan = match_score(instance, row.mean_score * n, report.cheapest_cost,
                                    std::max(report.cheapest_cost, report.best_score_cost), cfg.repair_budget, budget);
            if (plan) {
                row.matched = true;
                row.matched_budget = budget;
                row.matched_cost = plan->total_cost;
                row.matched_mean_score = plan->mean_score(n);
            }
            report.cascade.push_back(row);
        }
    }
    return report;
}

namespace {

nlohmann::json vector_json(const Eigen::VectorXd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

}  // namespace

nlohmann::json report_to_json(const BenchmarkReport& report) {
    using nlohmann::json;
    json out;
    out["seed"] = report.seed;
    out["n_sections"] = report.n_sections;
    out["models"] = report.model_ids;
    out["cheapest_cost"] = report.cheapest_cost;
    out["best_score_cost"] = report.best_score_cost;
    out["points"] = json::array();
    for (const auto& p : report.points) {
        json jp = {{"budget", p.budget},
                   {"budget_fraction", p.fraction ? json(*p.fraction) : json(nullptr)},
                   {"cost", p.cost},
                   {"objective", p.objective},
                   {"mean_score", p.mean_score},
                   {"lp_objective", p.lp_objective},
                   {"budget_violation_fraction", p.budget_violation_fraction},
                   {"allocation", vector_json(p.allocation)},
                   {"random_cost", p.random_cost},
                   {"random_mean_score", p.random_mean_score}};
        if (!p.error.empty()) jp["error"] = p.error;
        out["points"].push_back(std::move(jp));
    }
    out["single_model"] = json::array();
    for (const auto& s : report.single_model)
        out["single_model"].push_back({{"model", s.model_id}, {"cost", s.cost}, {"mean_score", s.mean_score}});
    out["cascade"] = json::array();
    for (const auto& c : report.cascade)
        out["cascade"].push_back({{"threshold", c.threshold},
                                  {"cost", c.cost},
                                  {"mean_score", c.mean_score},
                                  {"calls_per_section", c.calls_per_section},
                                  {"matched", c.matched},
                                  {"matched_budget", c.matched_budget},
                                  {"matched_cost", c.matched_cost},
                                  {"matched_mean_score", c.matched_mean_score}});
    out["budget_violation"] = {{"mean", report.mean_violation}, {"max", report.max_violation}};
    return out;
}

SweepSummary run_seed_sweep(const BenchmarkConfig& cfg, int num_seeds) {
    if (num_seeds < 1) throw ValidationError("need at least one seed");
    if (!cfg.budgets.empty()) throw ValidationError("multi-seed sweeps use budget fractions, not absolute budgets");
    SweepSummary summary;
    summary.fractions = cfg.budget_fractions;
    std::sort(summary.fractions.begin(), summary.fractions.end());
    const std::size_t m = summary.fractions.size();
    summary.mean_score.assign(m, 0.0);
    summary.random_mean_score.assign(m, 0.0);
    summary.cost.assign(m, 0.0);
    std::vector<int> solved(m, 0);
    std::size_t violation_points = 0;
    for (int s = 0; s < num_seeds; ++s) {
        BenchmarkConfig c = cfg;
        c.seed = cfg.seed + static_cast<std::uint64_t>(s);
        summary.seeds.push_back(c.seed);
        BenchmarkReport r = run_budget_sweep(c);
        for (std::size_t p = 0; p < r.points.size(); ++p) {
            const auto& pt = r.points[p];
            if (!pt.error.empty()) {
                ++summary.failed_points;
                continue;
            }
            summary.mean_score[p] += pt.mean_score;
            summary.random_mean_score[p] += pt.random_mean_score;
            summary.cost[p] += pt.cost;
            ++solved[p];
            summary.mean_violation += pt.budget_violation_fraction;
            summary.max_violation = std::max(summary.max_violation, pt.budget_violation_fraction);
            ++violation_points;
        }
        if (!r.cascade.empty()) {
            summary.cascade_cost += r.cascade.front().cost;
            summary.cascade_mean_score += r.cascade.front().mean_score;
            if (r.cascade.front().matched) {
                summary.matched_cost += r.cascade.front().matched_cost;
                ++summary.matched_seeds;
            }
        }
        summary.reports.push_back(std::move(r));
    }
    for (std::size_t p = 0; p < m; ++p) {
        if (solved[p] == 0) continue;
        summary.mean_score[p] /= solved[p];
        summary.random_mean_score[p] /= solved[p];
        summary.cost[p] /= solved[p];
    }
    if (violation_points > 0) summary.mean_violation /= static_cast<double>(violation_points);
    summary.cascade_cost /= num_seeds;
    summary.cascade_mean_score /= num_seeds;
    if (summary.matched_seeds > 0) summary.matched_cost /= summary.matched_seeds;
    return summary;
}

nlohmann::json summary_to_json(const SweepSummary& summary, bool include_reports) {
    using nlohmann::json;
    json out;
    out["seeds"] = summary.seeds;
    out["budget_fractions"] = summary.fractions;
    out["mean_score"] = summary.mean_score;
    out["random_mean_score"] = summary.random_mean_score;
    out["cost"] = summary.cost;
    out["cascade"] = {{"cost", summary.cascade_cost},
                      {"mean_score", summary.cascade_mean_score},
                      {"matched_cost", summary.matched_cost},
                      {"matched_seeds", summary.matched_seeds}};
    out["budget_violation"] = {{"mean", summary.mean_violation}, {"max", summary.max_violation}};
    out["failed_points"] = summary.failed_points;
    if (include_reports) {
        out["reports"] = json::array();
        for (const auto& r : summary.reports) out["reports"].push_back(report_to_json(r));
    }
    return out;
}

}  // namespace qcopt
