#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "qcopt/error.hpp"
#include "qcopt/io.hpp"
#include "qcopt/token_opt.hpp"
#include "support.hpp"

using namespace qcopt;

namespace {

const TokenVocabulary& vocab() { return test::cl100k(); }

std::size_t count(std::string_view s) { return count_tokens(s, vocab()); }

TokenBudgetedEdit edit(Heuristic h, double loss, std::size_t saved) {
    TokenBudgetedEdit e;
    e.heuristic = h;
    e.quality_loss = loss;
    e.tokens_saved = saved;
    return e;
}

// Include/exclude recursion over the edits; same contract as the selector:
// zero-saving edits are never taken, then most tokens, least loss, smallest ids.
Selection knapsack_oracle(const std::vector<TokenBudgetedEdit>& edits, double capacity) {
    Selection best;
    bool have = false;
    std::vector<Heuristic> chosen;
    auto rec = [&](auto&& self, std::size_t k, std::size_t saved, double loss) -> void {
        if (k == edits.size()) {
            if (loss > capacity) return;
            auto ids = chosen;
            std::sort(ids.begin(), ids.end());
            const bool better = !have || saved > best.tokens_saved ||
                                (saved == best.tokens_saved &&
                                 (loss < best.quality_loss || (loss == best.quality_loss && ids < best.heuristics)));
            if (better) {
                best = {ids, saved, loss};
                have = true;
            }
            return;
        }
        self(self, k + 1, saved, loss);
        if (edits[k].tokens_saved == 0) return;
        chosen.push_back(edits[k].heuristic);
        self(self, k + 1, saved + edits[k].tokens_saved, loss + edits[k].quality_loss);
        chosen.pop_back();
    };
    rec(rec, 0, 0, 0.0);
    return best;
}

// Walks permutations from the last to the first and keeps the best count,
// preferring the earlier permutation on ties.
std::pair<std::vector<Heuristic>, std::size_t> reverse_order_oracle(std::string_view sentence,
                                                                    std::vector<Heuristic> set) {
    std::sort(set.begin(), set.end(), std::greater<>());
    std::vector<Heuristic> best;
    std::size_t best_count = 0;
    do {
        std::string text(sentence);
        for (auto h : set) text = apply_heuristic(text, h, vocab()).text;
        const auto c = count(text);
        if (best.empty() || c <= best_count) {
            best = set;
            best_count = c;
        }
    } while (std::prev_permutation(set.begin(), set.end()));
    return {best, best_count};
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("heuristic codes") {
    for (auto h : kAllHeuristics) CHECK(parse_heuristic(heuristic_code(h)) == h);
    CHECK(parse_heuristic("rsw") == Heuristic::RSW);
    CHECK_THROWS_AS(parse_heuristic("XX"), ValidationError);
}

TEST_CASE("golden heuristic pairs") {
    const auto doc = read_json_file(test::data_dir() / "fixtures" / "heuristic_golden.json");
    TextResources custom = TextResources::bundled();
    custom.stopwords = {"the", "on"};
    const std::vector<std::pair<Heuristic, const TextResources*>> how = {
        {Heuristic::RA, &TextResources::bundled()},
        {Heuristic::RSW, &custom},
        {Heuristic::RA, &TextResources::bundled()},
        {Heuristic::RB, &TextResources::bundled()}};
    const auto& pairs = doc.at("pairs");
    REQUIRE(pairs.size() == how.size());
    for (std::size_t i = 0; i < how.size(); ++i) {
        const auto before = pairs[i].at("before").get<std::string>();
        const auto r = apply_heuristic(before, how[i].first, vocab(), *how[i].second);
        CHECK(r.text == pairs[i].at("after").get<std::string>());
        CHECK(r.tokens_saved ==
              pairs[i].at("before_count").get<std::size_t>() - pairs[i].at("after_count").get<std::size_t>());
    }
}

TEST_CASE("individual heuristics") {
    CHECK(apply_heuristic("No brackets here.", Heuristic::RB, vocab()).text == "No brackets here.");
    CHECK(apply_heuristic("No brackets here.", Heuristic::RB, vocab()).tokens_saved == 0);
    CHECK(apply_heuristic("Keep 1,000 items.", Heuristic::RP, vocab()).text == "Keep 1,000 items.");
    CHECK(apply_heuristic("We expedite it.", Heuristic::RS, vocab()).text == "We speed it.");
    // Same count either way, so the synonym is not used.
    CHECK(apply_heuristic("We commence it.", Heuristic::RS, vocab()).text == "We commence it.");
    CHECK(apply_heuristic("A semi-supervised model.", Heuristic::HC, vocab()).text == "A semi supervised model.");
    CHECK(apply_heuristic("The U.S.A. is large.", Heuristic::RSW, vocab()).text == "U.S.A. is large.");
    // Acronym dots stay when the acronym is glued to a word.
    CHECK(apply_heuristic("xU.S.", Heuristic::RA, vocab()).text == "xU.S.");
    for (auto h : kAllHeuristics) CHECK(apply_heuristic("", h, vocab()).text.empty());
}

TEST_CASE("a heuristic never increases the token count, even applied twice") {
    std::mt19937_64 rng(51);
    for (int t = 0; t < 300; ++t) {
        const auto s = test::fuzz_sentence(rng);
        const auto before = count(s);
        for (auto h : kAllHeuristics) {
            const auto once = apply_heuristic(s, h, vocab());
            CHECK(count(once.text) + once.tokens_saved == before);
            const auto twice = apply_heuristic(once.text, h, vocab());
            CHECK(count(twice.text) <= count(once.text));
            CHECK(apply_heuristic(s, h, vocab()).text == once.text);
        }
    }
}

TEST_CASE("measure_edits") {
    const std::vector<Heuristic> all(kAllHeuristics.begin(), kAllHeuristics.end());
    const StaticLossEstimator est;
    const auto noop = measure_edits("cat", all, vocab(), est);
    CHECK(noop.size() == all.size());
    for (const auto& e : noop) {
        CHECK(e.tokens_saved == 0);
        CHECK(e.quality_loss == 0.0);
    }

    const std::string s = "The very large (and costly) model, approximately U.S.A. based.";
    const auto edits = measure_edits(s, all, vocab(), est, TextResources::bundled(), 3);
    const auto before = count(s);
    for (const auto& e : edits) {
        CHECK(e.sentence_index == 3);
        CHECK(count(e.result) + e.tokens_saved == before);
        const double w = est.weights()[static_cast<std::size_t>(e.heuristic)];
        CHECK(e.quality_loss == doctest::Approx(w * e.tokens_saved / before));
    }

    const ConstantLossEstimator free(0.0);
    const auto free_edits = measure_edits(s, all, vocab(), free);
    const auto sel = select_heuristics(free_edits, LossBudget{0.0});
    std::size_t positive = 0;
    for (const auto& e : free_edits) positive += e.tokens_saved > 0;
    CHECK(sel.heuristics.size() == positive);

    struct Broken final : LossEstimator {
        double estimate(const EditContext&) const override { return -1.0; }
    };
    CHECK_THROWS_AS(measure_edits(s, all, vocab(), Broken{}), EstimatorError);
    CHECK_THROWS_AS(ConstantLossEstimator(-0.5), ValidationError);
}

TEST_CASE("knapsack examples") {
    const std::vector<TokenBudgetedEdit> three = {edit(Heuristic::CS, 0.01, 5), edit(Heuristic::RS, 0.02, 7),
                                                  edit(Heuristic::LS, 0.025, 8)};
    const auto sel = select_heuristics(three, LossBudget{0.03});
    CHECK(sel.heuristics == std::vector<Heuristic>{Heuristic::CS, Heuristic::RS});
    CHECK(sel.tokens_saved == 12);
    const auto oracle = knapsack_oracle(three, 0.03);
    CHECK(oracle.heuristics == sel.heuristics);

    CHECK(select_heuristics(three, LossBudget{0.0}).heuristics.empty());
    const std::vector<TokenBudgetedEdit> free = {edit(Heuristic::CS, 0, 5), edit(Heuristic::RS, 0, 0),
                                                 edit(Heuristic::RA, 0, 2)};
    CHECK(select_heuristics(free, LossBudget{0.0}).heuristics == std::vector<Heuristic>{Heuristic::CS, Heuristic::RA});
    CHECK_THROWS_AS(select_heuristics(three, LossBudget{-1.0}), ValidationError);
}

TEST_CASE("knapsack matches the recursive oracle") {
    std::mt19937_64 rng(52);
    std::uniform_int_distribution<int> saved(0, 6), grid(0, 8);
    for (int t = 0; t < 2000; ++t) {
        std::vector<TokenBudgetedEdit> edits;
        for (auto h : kAllHeuristics) {
            if (grid(rng) < 2) continue;
            // Coarse loss grid so ties on tokens and loss actually occur.
            edits.push_back(edit(h, grid(rng) / 16.0, static_cast<std::size_t>(saved(rng))));
        }
        const double capacity = grid(rng) / 8.0;
        const auto sel = select_heuristics(edits, LossBudget{capacity});
        const auto oracle = knapsack_oracle(edits, capacity);
        CHECK(sel.quality_loss <= capacity);
        CHECK(sel.heuristics == oracle.heuristics);
        CHECK(sel.tokens_saved == oracle.tokens_saved);
    }
}

TEST_CASE("best order") {
    const std::string s = "Very approximately (the) U.S.A. organizations, a well-known router.";
    const auto single = best_order(s, std::vector<Heuristic>{Heuristic::RB}, vocab());
    CHECK(single.order == std::vector<Heuristic>{Heuristic::RB});
    CHECK(single.text == apply_heuristic(s, Heuristic::RB, vocab()).text);

    // Disjoint spans commute; the first permutation is kept.
    const auto both = best_order("See (this) U.S.A. map.", std::vector<Heuristic>{Heuristic::RA, Heuristic::RB},
                                 vocab());
    CHECK(both.order == std::vector<Heuristic>{Heuristic::RB, Heuristic::RA});

    std::mt19937_64 rng(53);
    std::vector<Heuristic> all(kAllHeuristics.begin(), kAllHeuristics.end());
    for (int t = 0; t < 25; ++t) {
        const auto sentence = test::fuzz_sentence(rng);
        std::shuffle(all.begin(), all.end(), rng);
        const std::vector<Heuristic> subset(all.begin(), all.begin() + 1 + t % 5);
        const auto got = best_order(sentence, subset, vocab());
        const auto [order, c] = reverse_order_oracle(sentence, subset);
        CHECK(got.tokens_after == c);
        CHECK(got.order == order);
        CHECK(got.tokens_after <= got.tokens_before);
    }
}

TEST_CASE("passage compression") {
    const std::string passage = read_file(test::data_dir() / "corpus" / "research_abstract.txt");
    const StaticLossEstimator est;
    SUBCASE("zero budget leaves the text alone") {
        CompressionOptions opts;
        opts.budget.capacity = 0.0;
        const auto r = compress_passage(passage, opts, vocab(), est);
        CHECK(r.compressed == passage);
        CHECK(r.tokens_saved() == 0);
    }
    SUBCASE("totals are sums of sentences") {
        const auto r = compress_passage(passage, {}, vocab(), est);
        std::size_t before = 0, after = 0;
        double loss = 0;
        for (const auto& s : r.sentences) {
            CHECK(count(s.original) == s.tokens_before);
            CHECK(count(s.compressed) == s.tokens_after);
            CHECK(s.tokens_after <= s.tokens_before);
            before += s.tokens_before;
            after += s.tokens_after;
            loss += s.quality_loss;
        }
        CHECK(before == r.tokens_before);
        CHECK(after == r.tokens_after);
        CHECK(r.quality_loss == doctest::Approx(loss));
        CHECK(r.passage_tokens_before == count(passage));
        CHECK(r.passage_tokens_after == count(r.compressed));
        CHECK(r.tokens_saved() > 0);
        CHECK(compress_passage(passage, {}, vocab(), est).compressed == r.compressed);
    }
    SUBCASE("loss thresholds") {
        const auto full = compress_passage(passage, {}, vocab(), est);
        double previous = full.quality_loss;
        for (double f : {0.9, 0.8, 0.7}) {
            CompressionOptions opts;
            opts.fraction_of_full = f;
            const auto r = compress_passage(passage, opts, vocab(), est);
            CHECK(r.quality_loss <= previous + 1e-12);
            CHECK(r.tokens_saved() <= full.tokens_saved());
            previous = r.quality_loss;
        }
    }
    SUBCASE("enabled subset") {
        CompressionOptions opts;
        opts.enabled = {Heuristic::RB};
        const auto r = compress_passage("Plain text (with notes).", opts, vocab(), est);
        CHECK(r.compressed == "Plain text with notes.");
    }
}

TEST_CASE("control tags") {
    CHECK(control_tags(0.70, 0.95) == "<BERTSCORE_0.95> <NUM_TOKENS_RATIO_0.70>");
    CHECK(format_control_tags("Text.", 0.5, 0.9) == "<BERTSCORE_0.90> <NUM_TOKENS_RATIO_0.50> Text.");
    CHECK_THROWS_AS(control_tags(0.0, 0.9), ValidationError);
    CHECK_THROWS_AS(control_tags(0.5, 1.5), ValidationError);
    CHECK(num_tokens_ratio("same words", "same words", vocab()) == 1.0);
    const auto doc = read_json_file(test::data_dir() / "fixtures" / "heuristic_golden.json");
    const auto& pair = doc.at("ratio_pair");
    const double expected =
        pair.at("simple_count").get<double>() / pair.at("complex_count").get<double>();
    CHECK(expected == doctest::Approx(0.53));
    CHECK(num_tokens_ratio(pair.at("complex").get<std::string>(), pair.at("simple").get<std::string>(), vocab()) ==
          doctest::Approx(expected));
    CHECK_THROWS_AS(num_tokens_ratio("", "x", vocab()), ValidationError);
}

TEST_CASE("loss weights file") {
    const auto path = std::filesystem::temp_directory_path() / "qcopt_test_weights.json";
    std::ofstream(path) << R"({"RSW": 0.9, "CS": 0.0})";
    const auto est = StaticLossEstimator::from_json_file(path);
    CHECK(est.weights()[static_cast<std::size_t>(Heuristic::RSW)] == 0.9);
    CHECK(est.weights()[static_cast<std::size_t>(Heuristic::CS)] == 0.0);
    CHECK(est.weights()[static_cast<std::size_t>(Heuristic::RS)] == 0.5);
    std::ofstream(path) << R"({"ZZ": 0.9})";
    CHECK_THROWS_AS(StaticLossEstimator::from_json_file(path), ValidationError);
}
