#include <doctest.h>

#include "qcopt/text.hpp"

using namespace qcopt;

namespace {

std::vector<std::string> texts(const SplitPassage& p) {
    std::vector<std::string> out;
    for (const auto& s : p.sentences) out.push_back(s.text);
    return out;
}

}  // namespace

TEST_CASE("bundled resources") {
    const auto& r = TextResources::bundled();
    CHECK(r.stopwords.count("the"));
    CHECK(r.punctuation.count(","));
    CHECK(r.words.count("house"));
    CHECK(r.words.size() > 200000);
    CHECK(!r.synonyms.empty());
    for (std::size_t i = 1; i < r.prefixes.size(); ++i) CHECK(r.prefixes[i - 1].size() >= r.prefixes[i].size());
}

TEST_CASE("sentence splitting") {
    const std::set<std::string> abbrev{"e.g", "dr", "inc"};
    SUBCASE("simple") {
        const auto p = split_sentences("One two. Three four! Five?", abbrev);
        CHECK(texts(p) == std::vector<std::string>{"One two.", "Three four!", "Five?"});
        CHECK(p.join() == "One two. Three four! Five?");
    }
    SUBCASE("abbreviations and initials do not split") {
        const auto p = split_sentences("Dr. Smith met J. Doe. Then they left.", abbrev);
        CHECK(texts(p) == std::vector<std::string>{"Dr. Smith met J. Doe.", "Then they left."});
    }
    SUBCASE("lowercase continuation and decimals") {
        const auto p = split_sentences("Growth was 3.5 percent. it held.", abbrev);
        CHECK(p.sentences.size() == 1);
    }
    SUBCASE("blank line") {
        const auto p = split_sentences("  Heading\n\nBody text here.", abbrev);
        CHECK(p.leading == "  ");
        CHECK(texts(p) == std::vector<std::string>{"Heading", "Body text here."});
        CHECK(p.join() == "  Heading\n\nBody text here.");
    }
    SUBCASE("empty") { CHECK(split_sentences("", abbrev).sentences.empty()); }
}

TEST_CASE("word scanning") {
    WordSpan w{};
    const std::string s = "abc x2y d'e _f gh";
    std::vector<std::string> words;
    std::size_t from = 0;
    while (next_alpha_word(s, from, w)) {
        words.push_back(s.substr(w.begin, w.end - w.begin));
        from = w.end;
    }
    CHECK(words == std::vector<std::string>{"abc", "gh"});
}

TEST_CASE("case helpers") {
    CHECK(to_lower_ascii("HeLLo") == "hello");
    CHECK(match_case("House", "home") == "Home");
    CHECK(match_case("HOUSE", "home") == "HOME");
    CHECK(match_case("house", "home") == "home");
}
