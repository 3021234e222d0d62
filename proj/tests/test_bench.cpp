#include <doctest.h>

#include "qcopt/bench.hpp"
#include "qcopt/budget_opt.hpp"
#include "qcopt/error.hpp"

using namespace qcopt;

namespace {

BenchmarkConfig small(std::uint64_t seed, int n = 30) {
    BenchmarkConfig cfg;
    cfg.seed = seed;
    cfg.n_sections = n;
    return cfg;
}

}  // namespace

TEST_CASE("reference models") {
    const auto models = reference_models();
    REQUIRE(models.size() == 3);
    CHECK(models[0].id == "gpt-3.5-turbo");
    CHECK(models[0].input_cost_per_token == doctest::Approx(0.0015 / 1000));
    CHECK(models[0].output_cost_per_token == doctest::Approx(0.002 / 1000));
    CHECK(models[1].input_cost_per_token == doctest::Approx(0.02 / 1000));
    CHECK(models[2].output_cost_per_token == doctest::Approx(0.002 / 1000));
    CHECK(models[0].latency_per_token == doctest::Approx(1.5 / 500));
}

TEST_CASE("instances are deterministic in the seed") {
    const auto a = generate_instance(small(3)), b = generate_instance(small(3)), c = generate_instance(small(4));
    CHECK(a.scores() == b.scores());
    CHECK(a.costs() == b.costs());
    CHECK(a.scores() != c.scores());
    CHECK(report_to_json(run_budget_sweep(small(3))) == report_to_json(run_budget_sweep(small(3))));
}

TEST_CASE("sweep invariants") {
    const auto r = run_budget_sweep(small(5, 60));
    REQUIRE(r.points.size() == 9);
    double previous_lp = -1, previous_budget = -1;
    for (const auto& p : r.points) {
        CHECK(p.error.empty());
        CHECK(p.budget > previous_budget);
        CHECK(p.lp_objective >= previous_lp - 1e-9);
        CHECK(p.allocation.sum() == doctest::Approx(1.0));
        previous_lp = p.lp_objective;
        previous_budget = p.budget;
    }
    CHECK(r.single_model.size() == 3);
    CHECK(r.cascade.size() == 1);
    CHECK(r.cheapest_cost < r.best_score_cost);
}

TEST_CASE("degenerate sizes") {
    const auto empty = generate_instance(small(1, 0));
    CHECK(empty.num_sections() == 0);
    const auto plan = solve_budget_opt(empty.with_budget(0.0));
    CHECK(plan.assignment.empty());
    CHECK(run_budget_sweep(small(1, 0)).points.size() == 9);

    auto cfg = small(2, 20);
    cfg.models.resize(1);
    const auto single = run_budget_sweep(cfg);
    for (const auto& p : single.points) {
        CHECK(p.error.empty());
        CHECK(p.allocation(0) == doctest::Approx(1.0));
    }
}

TEST_CASE("cascade accounting") {
    const auto inst = generate_instance(small(8, 40));
    const auto always_first = run_cascade(inst, 0.0);
    CHECK(always_first.calls_per_section == 1.0);
    const auto never_stops = run_cascade(inst, 1.01);
    CHECK(never_stops.calls_per_section == 3.0);
    CHECK(never_stops.cost == doctest::Approx(inst.costs().sum()));
    CHECK(always_first.cost < never_stops.cost);
}

TEST_CASE("config validation") {
    auto cfg = small(1);
    cfg.n_sections = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = small(1);
    cfg.min_tokens = 10;
    cfg.max_tokens = 5;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg = small(1);
    cfg.score_distribution = {{1, 1}};
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("seed sweep summary") {
    auto cfg = small(10, 40);
    const auto s = run_seed_sweep(cfg, 5);
    CHECK(s.seeds.size() == 5);
    CHECK(s.mean_score.size() == 9);
    CHECK(s.failed_points == 0);
    for (std::size_t f = 0; f < s.fractions.size(); ++f) CHECK(s.mean_score[f] >= s.random_mean_score[f]);
}
