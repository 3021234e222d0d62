#include <doctest.h>

#include "qcopt/core.hpp"
#include "qcopt/error.hpp"

using namespace qcopt;

namespace {

ModelProfile turbo() {
    ModelProfile m;
    m.id = "turbo";
    m.input_cost_per_token = 0.0015 / 1000;
    m.output_cost_per_token = 0.002 / 1000;
    m.latency_per_token = 0.001;
    m.avg_tokens_per_sentence = 100;
    return m;
}

Section section(std::int64_t input, int sentences, const std::string& model = "turbo") {
    Section s;
    s.id = "s";
    s.summary_sentences = sentences;
    s.input_tokens_per_model[model] = input;
    return s;
}

}  // namespace

TEST_CASE("estimated output tokens round up") {
    ModelProfile m;
    m.id = "x";
    m.avg_tokens_per_sentence = 20;
    CHECK(estimated_output_tokens(section(0, 5, "x"), m) == 100);
    m.avg_tokens_per_sentence = 1;
    CHECK(estimated_output_tokens(section(0, 1, "x"), m) == 1);
    m.avg_tokens_per_sentence = 17.5;
    CHECK(estimated_output_tokens(section(0, 3, "x"), m) == 53);
}

TEST_CASE("cost from per-token rates") {
    // 1000 input + 5 * 100 output tokens at 0.0015 and 0.002 per 1K.
    CHECK(estimated_cost(section(1000, 5), turbo()) == doctest::Approx(0.0015 + 0.001).epsilon(1e-12));
    ModelProfile zero;
    zero.id = "turbo";
    CHECK(estimated_cost(section(1000, 5), zero) == 0.0);
    ModelProfile fixed;
    fixed.id = "turbo";
    fixed.fixed_cost = 0.01;
    fixed.avg_tokens_per_sentence = 1;
    CHECK(estimated_cost(section(0, 1), fixed) == doctest::Approx(0.01));
}

TEST_CASE("latency is rate times total tokens") {
    CHECK(estimated_latency(section(1000, 5), turbo()) == doctest::Approx(1.5));
    ModelProfile m = turbo();
    m.latency_per_token = 0;
    CHECK(estimated_latency(section(1000, 5), m) == 0.0);
    m.latency_per_token = 2;
    m.avg_tokens_per_sentence = 1;
    CHECK(estimated_latency(section(0, 1), m) == doctest::Approx(2.0));
}

TEST_CASE("instance precomputes coefficients") {
    std::vector<ModelProfile> models{turbo()};
    std::vector<Section> sections{section(1000, 5)};
    RoutingInstance inst(models, sections, ScoreMatrix::Constant(1, 1, 0.5), 1.0);
    CHECK(inst.costs()(0, 0) == doctest::Approx(0.0025));
    CHECK(inst.latencies()(0, 0) == doctest::Approx(1.5));
    CHECK(inst.model_index("turbo") == 0);
    CHECK(inst.section_index("s") == 0);
    CHECK(cheapest_assignment_cost(inst) == doctest::Approx(0.0025));
}

TEST_CASE("instance validation") {
    std::vector<ModelProfile> models{turbo()};
    std::vector<Section> sections{section(1000, 5)};
    SUBCASE("score outside [0,1]") {
        CHECK_THROWS_AS(RoutingInstance(models, sections, ScoreMatrix::Constant(1, 1, 1.2)), ValidationError);
    }
    SUBCASE("score shape") {
        CHECK_THROWS_AS(RoutingInstance(models, sections, ScoreMatrix::Constant(2, 1, 0.5)), ValidationError);
    }
    SUBCASE("negative rate") {
        models[0].input_cost_per_token = -1;
        CHECK_THROWS_AS(RoutingInstance(models, sections, ScoreMatrix::Constant(1, 1, 0.5)), ValidationError);
    }
    SUBCASE("missing token count") {
        sections[0].input_tokens_per_model.clear();
        CHECK_THROWS_AS(RoutingInstance(models, sections, ScoreMatrix::Constant(1, 1, 0.5)), ValidationError);
    }
    SUBCASE("duplicate section id") {
        sections.push_back(sections[0]);
        CHECK_THROWS_AS(RoutingInstance(models, sections, ScoreMatrix::Constant(2, 1, 0.5)), ValidationError);
    }
    SUBCASE("negative budget") {
        CHECK_THROWS_AS(RoutingInstance(models, sections, ScoreMatrix::Constant(1, 1, 0.5), -1.0), ValidationError);
    }
}

TEST_CASE("evaluate_assignment totals") {
    std::vector<ModelProfile> models{turbo(), turbo()};
    models[1].id = "other";
    models[1].input_cost_per_token *= 2;
    Section a = section(1000, 5), b = section(100, 1);
    a.input_tokens_per_model["other"] = 1000;
    b.id = "b";
    b.input_tokens_per_model["other"] = 100;
    ScoreMatrix scores(2, 2);
    scores << 0.9, 0.8, 0.5, 0.6;
    RoutingInstance inst(models, {a, b}, scores, 0.0025);
    const auto plan = evaluate_assignment(inst, {0, 1});
    CHECK(plan.objective == doctest::Approx(1.5));
    CHECK(plan.total_cost == doctest::Approx(inst.costs()(0, 0) + inst.costs()(1, 1)));
    CHECK(plan.per_model_latency(0) == doctest::Approx(1.5));
    CHECK(plan.budget_violation_fraction == doctest::Approx((plan.total_cost - 0.0025) / 0.0025));
    CHECK(plan.allocation_fractions(2).sum() == doctest::Approx(1.0));
    CHECK(plan.mean_score(2) == doctest::Approx(0.75));

    const auto partial = evaluate_assignment(inst, {0, kUnassigned});
    CHECK(partial.unassigned_sections() == std::vector<int>{1});
}
