#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qcopt/text.hpp"
#include "qcopt/tokenizer.hpp"

namespace qcopt {

/// The eight rewrites. Enumerator order is the canonical id order used for
/// every lexicographic tie-break.
enum class Heuristic : int {
    CS,   // prepend a space and/or flip the case of a word's first letter
    RS,   // replace a word with a cheaper synonym
    LS,   // stem, then repair the stem to a dictionary word
    RB,   // drop round parentheses, keeping their content
    HC,   // split compounds: hyphen to space, or prefix + space
    RSW,  // remove selected stop words
    RP,   // remove selected punctuation marks
    RA,   // remove the dots of an upper-case acronym
};

inline constexpr std::size_t kHeuristicCount = 8;
inline constexpr std::array<Heuristic, kHeuristicCount> kAllHeuristics = {
    Heuristic::CS, Heuristic::RS, Heuristic::LS, Heuristic::RB,
    Heuristic::HC, Heuristic::RSW, Heuristic::RP, Heuristic::RA};

std::string_view heuristic_code(Heuristic h);
/// Accepts the two/three-letter codes, case-insensitively.
Heuristic parse_heuristic(std::string_view code);

struct HeuristicResult {
    std::string text;
    std::size_t tokens_saved = 0;
};

/// Rewrites `sentence` left to right; each candidate edit is kept only when
/// the sentence's token count strictly drops, so the result never has more
/// tokens than the input.
HeuristicResult apply_heuristic(std::string_view sentence, Heuristic h, const TokenVocabulary& vocab,
                                const TextResources& resources = TextResources::bundled());

/// What a loss estimator sees for one heuristic applied to one sentence.
struct EditContext {
    Heuristic heuristic;
    std::string_view before;
    std::string_view after;
    std::size_t tokens_before;
    std::size_t tokens_after;
};

class LossEstimator {
public:
    virtual ~LossEstimator() = default;
    /// Estimated quality loss (>= 0) of replacing `before` with `after`.
    virtual double estimate(const EditContext& edit) const = 0;
};

/// loss = weight[h] * tokens_saved / tokens_before.
class StaticLossEstimator final : public LossEstimator {
public:
    using Weights = std::array<double, kHeuristicCount>;

    StaticLossEstimator();
    explicit StaticLossEstimator(const Weights& weights);

    static Weights default_weights();
    /// JSON object mapping heuristic codes to weights; codes not named keep
    /// their default.
    static StaticLossEstimator from_json_file(const std::filesystem::path& path);

    double estimate(const EditContext& edit) const override;
    const Weights& weights() const noexcept { return weights_; }

private:
    Weights weights_;
};

class ConstantLossEstimator final : public LossEstimator {
public:
    explicit ConstantLossEstimator(double value);
    double estimate(const EditContext&) const override { return value_; }

private:
    double value_;
};

struct TokenBudgetedEdit {
    std::size_t sentence_index = 0;
    Heuristic heuristic;
    std::size_t tokens_saved = 0;
    double quality_loss = 0.0;
    std::string result;
};

/// One record per heuristic, each applied alone to the original sentence.
std::vector<TokenBudgetedEdit> measure_edits(std::string_view sentence, std::span<const Heuristic> heuristics,
                                             const TokenVocabulary& vocab, const LossEstimator& estimator,
                                             const TextResources& resources = TextResources::bundled(),
                                             std::size_t sentence_index = 0);

struct LossBudget {
    double capacity = 0.0;
};

struct Selection {
    std::vector<Heuristic> heuristics;  // ascending id
    std::size_t tokens_saved = 0;
    double quality_loss = 0.0;
};

/// Exact 0/1 knapsack by subset enumeration (at most 8 edits). Zero-profit
/// edits are never selected. Ties: smaller total loss, then the
/// lexicographically smaller id list.
Selection select_heuristics(std::span<const TokenBudgetedEdit> edits, LossBudget budget);

struct OrderResult {
    std::vector<Heuristic> order;
    std::string text;
    std::size_t tokens_before = 0;
    std::size_t tokens_after = 0;
    std::size_t tokens_saved() const { return tokens_before - tokens_after; }
};

/// Tries every permutation of `heuristics` and keeps the one with the fewest
/// final tokens; ties go to the lexicographically first permutation.
OrderResult best_order(std::string_view sentence, std::span<const Heuristic> heuristics,
                       const TokenVocabulary& vocab, const TextResources& resources = TextResources::bundled());

struct CompressionOptions {
    /// Per-sentence loss capacity. Ignored when `fraction_of_full` is set.
    LossBudget budget{std::numeric_limits<double>::infinity()};
    /// Capacity as a fraction of the sentence's summed loss over all
    /// positive-profit edits.
    std::optional<double> fraction_of_full;
    std::vector<Heuristic> enabled{kAllHeuristics.begin(), kAllHeuristics.end()};
};

struct SentenceReport {
    std::size_t index = 0;
    std::string original;
    std::string compressed;
    std::size_t tokens_before = 0;
    std::size_t tokens_after = 0;
    double capacity = 0.0;
    double quality_loss = 0.0;
    std::vector<Heuristic> selected;
    std::vector<Heuristic> order;
    std::vector<TokenBudgetedEdit> edits;
};

struct PassageReport {
    std::string compressed;
    std::vector<SentenceReport> sentences;
    std::size_t tokens_before = 0;  // sum over sentences
    std::size_t tokens_after = 0;
    std::size_t passage_tokens_before = 0;  // whole passage, separators included
    std::size_t passage_tokens_after = 0;
    double quality_loss = 0.0;

    std::size_t tokens_saved() const { return tokens_before - tokens_after; }
    /// tokens_saved / tokens_before, 0 for an empty passage.
    double compression() const;
};

/// Split into sentences, then per sentence: measure, select, order, apply.
PassageReport compress_passage(std::string_view passage, const CompressionOptions& options,
                               const TokenVocabulary& vocab, const LossEstimator& estimator,
                               const TextResources& resources = TextResources::bundled());

/// "<BERTSCORE_s> <NUM_TOKENS_RATIO_r>" with two decimals. Requires
/// ratio in (0, 1] and similarity in [0, 1].
std::string control_tags(double target_token_ratio, double target_similarity);

/// Tags followed by a space and the source text.
std::string format_control_tags(std::string_view original, double target_token_ratio, double target_similarity);

/// count_tokens(simple) / count_tokens(complex).
double num_tokens_ratio(std::string_view complex, std::string_view simple, const TokenVocabulary& vocab);

}  // namespace qcopt
