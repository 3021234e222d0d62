#include "qcopt/token_opt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "qcopt/error.hpp"
#include "qcopt/stemmer.hpp"

namespace qcopt {
namespace {

struct Candidate {
    std::size_t begin;
    std::size_t end;
    std::vector<std::string> variants;
};

using Finder = std::function<bool(std::string_view text, std::size_t from, Candidate& out)>;

std::string apply_conditional(std::string_view sentence, const Finder& find, const TokenVocabulary& vocab) {
    std::string current(sentence);
    std::size_t count = count_tokens(current, vocab);
    std::size_t pos = 0;
    Candidate c;
    while (find(current, pos, c)) {
        std::size_t best_count = count;
        const std::string* best = nullptr;
        std::string best_text;
        for (const auto& v : c.variants) {
            std::string trial = current.substr(0, c.begin) + v + current.substr(c.end);
            std::size_t n = count_tokens(trial, vocab);
            if (n < best_count) {
                best_count = n;
                best = &v;
                best_text = std::move(trial);
            }
        }
        if (best) {
            pos = c.begin + best->size();
            current = std::move(best_text);
            count = best_count;
        } else {
            pos = c.end;
        }
    }
    return current;
}

char flip_case(char c) {
    if (c >= 'a' && c <= 'z') return static_cast<char>(c - 'a' + 'A');
    if (c >= 'A' && c <= 'Z') return static_cast<char>(c - 'A' + 'a');
    return c;
}

bool find_case_space(std::string_view text, std::size_t from, Candidate& out) {
    WordSpan w;
    if (!next_alpha_word(text, from, w)) return false;
    std::string word(text.substr(w.begin, w.end - w.begin));
    std::string flipped = word;
    flipped.front() = flip_case(flipped.front());
    out = {w.begin, w.end, {}};
    if (w.begin > 0 && !is_ascii_space(text[w.begin - 1])) {
        std::string lowered = word;
        if (is_ascii_upper(lowered.front())) lowered.front() = flip_case(lowered.front());
        out.variants.push_back(" " + lowered);
        if (lowered != word) out.variants.push_back(" " + word);
    }
    out.variants.push_back(flipped);
    return true;
}

Finder synonym_finder(const TextResources& r) {
    return [&r](std::string_view text, std::size_t from, Candidate& out) {
        WordSpan w;
        while (next_alpha_word(text, from, w)) {
            auto word = text.substr(w.begin, w.end - w.begin);
            auto it = r.synonyms.find(to_lower_ascii(word));
            if (it != r.synonyms.end()) {
                out = {w.begin, w.end, {match_case(word, it->second)}};
                return true;
            }
            from = w.end;
        }
        return false;
    };
}

Finder stem_finder(const TextResources& r) {
    return [&r](std::string_view text, std::size_t from, Candidate& out) {
        WordSpan w;
        while (next_alpha_word(text, from, w)) {
            auto word = text.substr(w.begin, w.end - w.begin);
            from = w.end;
            if (word.size() < 3) continue;
            std::string lower = to_lower_ascii(word);
            std::string stem = porter_stem(lower);
            if (stem == lower || stem.empty()) continue;
            std::vector<std::string> repaired = {stem, stem + "e"};
            if (stem.back() == 'i') repaired.push_back(stem.substr(0, stem.size() - 1) + "y");
            out = {w.begin, w.end, {}};
            for (const auto& form : repaired)
                if (form != lower && r.words.count(form)) out.variants.push_back(match_case(word, form));
            if (!out.variants.empty()) return true;
        }
        return false;
    };
}

bool find_brackets(std::string_view text, std::size_t from, Candidate& out) {
    for (std::size_t open = text.find('(', from); open != std::string_view::npos; open = text.find('(', open + 1)) {
        int depth = 0;
        for (std::size_t i = open; i < text.size(); ++i) {
            if (text[i] == '(') ++depth;
            if (text[i] == ')' && --depth == 0) {
                out = {open, i + 1, {std::string(text.substr(open + 1, i - open - 1))}};
                return true;
            }
        }
    }
    return false;
}

Finder compound_finder(const TextResources& r) {
    return [&r](std::string_view text, std::size_t from, Candidate& out) {
        for (std::size_t i = from; i < text.size(); ++i) {
            if (text[i] == '-' && i > 0 && i + 1 < text.size() && is_ascii_alpha(text[i - 1]) &&
                is_ascii_alpha(text[i + 1])) {
                out = {i, i + 1, {" "}};
                return true;
            }
            if (!is_ascii_alpha(text[i]) || (i > 0 && is_ascii_alpha(text[i - 1]))) continue;
            WordSpan w;
            if (!next_alpha_word(text, i, w) || w.begin != i) continue;
            auto word = text.substr(w.begin, w.end - w.begin);
            std::string lower = to_lower_ascii(word);
            out = {w.begin, w.end, {}};
            for (const auto& p : r.prefixes)
                if (lower.size() >= p.size() + 3 && lower.compare(0, p.size(), p) == 0)
                    out.variants.push_back(std::string(word.substr(0, p.size())) + " " +
                                           std::string(word.substr(p.size())));
            if (!out.variants.empty()) return true;
        }
        return false;
    };
}

Finder stopword_finder(const TextResources& r) {
    return [&r](std::string_view text, std::size_t from, Candidate& out) {
        WordSpan w;
        while (next_alpha_word(text, from, w)) {
            // Acronym letters and initials ("U.S.A.", "A. Smith") are not words.
            bool dotted = (w.begin > 0 && text[w.begin - 1] == '.') ||
                          (w.end - w.begin == 1 && w.end < text.size() && text[w.end] == '.');
            if (!dotted && r.stopwords.count(to_lower_ascii(text.substr(w.begin, w.end - w.begin)))) {
                if (w.begin > 0 && text[w.begin - 1] == ' ')
                    out = {w.begin - 1, w.end, {""}};
                else if (w.end < text.size() && text[w.end] == ' ')
                    out = {w.begin, w.end + 1, {""}};
                else
                    out = {w.begin, w.end, {""}};
                return true;
            }
            from = w.end;
        }
        return false;
    };
}

Finder punctuation_finder(const TextResources& r) {
    return [&r](std::string_view text, std::size_t from, Candidate& out) {
        for (std::size_t i = from; i < text.size(); ++i) {
            if (!r.punctuation.count(std::string(1, text[i]))) continue;
            bool before_digit = i > 0 && is_ascii_digit(text[i - 1]);
            bool after_digit = i + 1 < text.size() && is_ascii_digit(text[i + 1]);
            if (before_digit && after_digit) continue;  // 1,000 and 12:30 stay
            bool spaced = i > 0 && text[i - 1] == ' ' && i + 1 < text.size() && text[i + 1] == ' ';
            out = {i, spaced ? i + 2 : i + 1, {""}};
            return true;
        }
        return false;
    };
}

bool find_acronym(std::string_view text, std::size_t from, Candidate& out) {
    for (std::size_t i = from; i + 1 < text.size(); ++i) {
        if (!is_ascii_upper(text[i]) || text[i + 1] != '.') continue;
        if (i > 0 && (is_ascii_alpha(text[i - 1]) || text[i - 1] == '.')) continue;
        std::size_t j = i;
        std::string letters;
        while (j + 1 < text.size() && is_ascii_upper(text[j]) && text[j + 1] == '.') {
            letters += text[j];
            j += 2;
        }
        if (letters.size() < 2 || (j < text.size() && is_ascii_alpha(text[j]))) continue;
        out = {i, j, {letters}};
        return true;
    }
    return false;
}

Finder finder_for(Heuristic h, const TextResources& r) {
    switch (h) {
        case Heuristic::CS: return find_case_space;
        case Heuristic::RS: return synonym_finder(r);
        case Heuristic::LS: return stem_finder(r);
        case Heuristic::RB: return find_brackets;
        case Heuristic::HC: return compound_finder(r);
        case Heuristic::RSW: return stopword_finder(r);
        case Heuristic::RP: return punctuation_finder(r);
        case Heuristic::RA: return find_acronym;
    }
    throw ValidationError("unknown heuristic");
}

std::size_t index_of(Heuristic h) { return static_cast<std::size_t>(h); }

std::string two_decimals(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

}  // namespace

std::string_view heuristic_code(Heuristic h) {
    static constexpr std::array<std::string_view, kHeuristicCount> codes = {"CS", "RS", "LS", "RB",
                                                                           "HC", "RSW", "RP", "RA"};
    return codes.at(index_of(h));
}

Heuristic parse_heuristic(std::string_view code) {
    std::string upper(code);
    for (auto& c : upper)
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    for (Heuristic h : kAllHeuristics)
        if (heuristic_code(h) == upper) return h;
    throw ValidationError("unknown heuristic '" + std::string(code) + "' (expected CS, RS, LS, RB, HC, RSW, RP or RA)");
}

HeuristicResult apply_heuristic(std::string_view sentence, Heuristic h, const TokenVocabulary& vocab,
                                const TextResources& resources) {
    HeuristicResult result;
    result.text = apply_conditional(sentence, finder_for(h, resources), vocab);
    result.tokens_saved = count_tokens(sentence, vocab) - count_tokens(result.text, vocab);
    return result;
}

StaticLossEstimator::StaticLossEstimator() : weights_(default_weights()) {}

StaticLossEstimator::StaticLossEstimator(const Weights& weights) : weights_(weights) {
    for (std::size_t i = 0; i < kHeuristicCount; ++i)
        if (!std::isfinite(weights_[i]) || weights_[i] < 0)
            throw ValidationError("loss weight for " + std::string(heuristic_code(kAllHeuristics[i])) +
                                  " must be finite and non-negative");
}

StaticLossEstimator::Weights StaticLossEstimator::default_weights() {
    Weights w{};
    w[index_of(Heuristic::RSW)] = 0.6;
    w[index_of(Heuristic::RS)] = 0.5;
    w[index_of(Heuristic::LS)] = 0.4;
    w[index_of(Heuristic::HC)] = 0.2;
    w[index_of(Heuristic::RP)] = 0.15;
    w[index_of(Heuristic::CS)] = 0.1;
    w[index_of(Heuristic::RB)] = 0.05;
    w[index_of(Heuristic::RA)] = 0.05;
    return w;
}

StaticLossEstimator StaticLossEstimator::from_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open loss weights " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError(path.string() + ": expected an object of heuristic weights");
    Weights w = default_weights();
    for (auto& [key, value] : j.items()) {
        if (!value.is_number()) throw ValidationError(path.string() + ": weight for " + key + " is not a number");
        w[index_of(parse_heuristic(key))] = value.get<double>();
    }
    return StaticLossEstimator(w);
}

double StaticLossEstimator::estimate(const EditContext& edit) const {
    if (edit.tokens_before == 0 || edit.tokens_after >= edit.tokens_before) return 0.0;
    double saved = static_cast<double>(edit.tokens_before - edit.tokens_after);
    return weights_[index_of(edit.heuristic)] * saved / static_cast<double>(edit.tokens_before);
}

ConstantLossEstimator::ConstantLossEstimator(double value) : value_(value) {
    if (!std::isfinite(value) || value < 0) throw ValidationError("constant loss must be finite and non-negative");
}

std::vector<TokenBudgetedEdit> measure_edits(std::string_view sentence, std::span<const Heuristic> heuristics,
                                             const TokenVocabulary& vocab, const LossEstimator& estimator,
                                             const TextResources& resources, std::size_t sentence_index) {
    std::vector<TokenBudgetedEdit> edits;
    std::size_t before = count_tokens(sentence, vocab);
    for (Heuristic h : heuristics) {
        auto applied = apply_heuristic(sentence, h, vocab, resources);
        TokenBudgetedEdit e{sentence_index, h, applied.tokens_saved, 0.0, std::move(applied.text)};
        EditContext ctx{h, sentence, e.result, before, before - e.tokens_saved};
        std::string code(heuristic_code(h));
        try {
            e.quality_loss = estimator.estimate(ctx);
        } catch (const std::exception& ex) {
            throw EstimatorError("loss estimator failed for heuristic " + code + ": " + ex.what(), code);
        }
        if (!std::isfinite(e.quality_loss) || e.quality_loss < 0)
            throw EstimatorError("loss estimator returned an invalid loss for heuristic " + code, code);
        edits.push_back(std::move(e));
    }
    return edits;
}

Selection select_heuristics(std::span<const TokenBudgetedEdit> edits, LossBudget budget) {
    if (edits.size() > kHeuristicCount)
        throw ValidationError("at most " + std::to_string(kHeuristicCount) + " edits per sentence");
    if (std::isnan(budget.capacity) || budget.capacity < 0)
        throw ValidationError("loss budget must be non-negative");
    const std::size_t m = edits.size();
    Selection best;
    for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
        Selection s;
        bool usable = true;
        for (std::size_t k = 0; k < m && usable; ++k) {
            if (!(mask >> k & 1u)) continue;
            if (edits[k].tokens_saved == 0) usable = false;
            s.tokens_saved += edits[k].tokens_saved;
            s.quality_loss += edits[k].quality_loss;
            s.heuristics.push_back(edits[k].heuristic);
        }
        if (!usable || s.quality_loss > budget.capacity) continue;
        std::sort(s.heuristics.begin(), s.heuristics.end());
        bool better = s.tokens_saved > best.tokens_saved ||
                      (s.tokens_saved == best.tokens_saved &&
                       (s.quality_loss < best.quality_loss ||
                        (s.quality_loss == best.quality_loss && s.heuristics < best.heuristics)));
        if (mask == 0 || better) best = std::move(s);
    }
    return best;
}

OrderResult best_order(std::string_view sentence, std::span<const Heuristic> heuristics,
                       const TokenVocabulary& vocab, const TextResources& resources) {
    std::vector<Heuristic> perm(heuristics.begin(), heuristics.end());
    std::sort(perm.begin(), perm.end());
    perm.erase(std::unique(perm.begin(), perm.end()), perm.end());

    // Memoized transitions between distinct intermediate texts.
    std::vector<std::string> texts;
    std::vector<std::size_t> counts;
    std::vector<std::array<int, kHeuristicCount>> next;
    std::unordered_map<std::string, int> id_of;
    auto intern = [&](std::string text) {
        auto it = id_of.find(text);
        if (it != id_of.end()) return it->second;
        int id = static_cast<int>(texts.size());
        counts.push_back(count_tokens(text, vocab));
        next.emplace_back().fill(-1);
        id_of.emplace(text, id);
        texts.push_back(std::move(text));
        return id;
    };
    auto step = [&](int t, Heuristic h) {
        if (next[t][index_of(h)] < 0) {
            int to = intern(apply_heuristic(texts[t], h, vocab, resources).text);
            next[t][index_of(h)] = to;
        }
        return next[t][index_of(h)];
    };

    const int root = intern(std::string(sentence));
    OrderResult result{perm, texts[root], counts[root], counts[root]};
    int best = -1;
    do {
        int t = root;
        for (Heuristic h : perm) t = step(t, h);
        if (best < 0 || counts[t] < counts[best]) {
            best = t;
            result.order = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    result.text = texts[best];
    result.tokens_after = counts[best];
    return result;
}

double PassageReport::compression() const {
    return tokens_before == 0 ? 0.0 : static_cast<double>(tokens_saved()) / static_cast<double>(tokens_before);
}

PassageReport compress_passage(std::string_view passage, const CompressionOptions& options,
                               const TokenVocabulary& vocab, const LossEstimator& estimator,
                               const TextResources& resources) {
    if (options.fraction_of_full && (!std::isfinite(*options.fraction_of_full) || *options.fraction_of_full < 0))
        throw ValidationError("loss fraction must be finite and non-negative");
    if (!options.fraction_of_full && (std::isnan(options.budget.capacity) || options.budget.capacity < 0))
        throw ValidationError("loss budget must be non-negative");
    std::vector<Heuristic> enabled = options.enabled;
    std::sort(enabled.begin(), enabled.end());
    enabled.erase(std::unique(enabled.begin(), enabled.end()), enabled.end());

    PassageReport report;
    SplitPassage split = split_sentences(passage, resources.abbreviations);
    for (std::size_t i = 0; i < split.sentences.size(); ++i) {
        auto& sentence = split.sentences[i];
        SentenceReport s;
        s.index = i;
        s.original = sentence.text;
        s.edits = measure_edits(sentence.text, enabled, vocab, estimator, resources, i);
        if (options.fraction_of_full) {
            double full = 0.0;
            for (const auto& e : s.edits)
                if (e.tokens_saved > 0) full += e.quality_loss;
            s.capacity = *options.fraction_of_full * full;
        } else {
            s.capacity = options.budget.capacity;
        }
        Selection selection = select_heuristics(s.edits, LossBudget{s.capacity});
        OrderResult ordered = best_order(sentence.text, selection.heuristics, vocab, resources);
        s.selected = selection.heuristics;
        s.order = ordered.order;
        s.quality_loss = selection.quality_loss;
        s.compressed = ordered.text;
        s.tokens_before = ordered.tokens_before;
        s.tokens_after = ordered.tokens_after;
        report.tokens_before += s.tokens_before;
        report.tokens_after += s.tokens_after;
        report.quality_loss += s.quality_loss;
        sentence.text = s.compressed;
        report.sentences.push_back(std::move(s));
    }
    report.compressed = split.join();
    report.passage_tokens_before = count_tokens(passage, vocab);
    report.passage_tokens_after = count_tokens(report.compressed, vocab);
    return report;
}

std::string control_tags(double target_token_ratio, double target_similarity) {
    if (!(target_token_ratio > 0.0 && target_token_ratio <= 1.0))
        throw ValidationError("target token ratio must be in (0, 1]");
    if (!(target_similarity >= 0.0 && target_similarity <= 1.0))
        throw ValidationError("target similarity must be in [0, 1]");
    return "<BERTSCORE_" + two_decimals(target_similarity) + "> <NUM_TOKENS_RATIO_" +
           two_decimals(target_token_ratio) + ">";
}

std::string format_control_tags(std::string_view original, double target_token_ratio, double target_similarity) {
    return control_tags(target_token_ratio, target_similarity) + " " + std::string(original);
}

double num_tokens_ratio(std::string_view complex, std::string_view simple, const TokenVocabulary& vocab) {
    std::size_t denominator = count_tokens(complex, vocab);
    if (denominator == 0) throw ValidationError("complex text has no tokens");
    return static_cast<double>(count_tokens(simple, vocab)) / static_cast<double>(denominator);
}

}  // namespace qcopt
