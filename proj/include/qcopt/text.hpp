#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace qcopt {

/// Editable word lists used by the sentence splitter and the token
/// heuristics. Files are one entry per line; `#` starts a comment.
struct TextResources {
    std::set<std::string> stopwords;
    std::set<std::string> punctuation;  // single-byte marks
    std::vector<std::string> prefixes;  // longest first
    std::map<std::string, std::string> synonyms;
    std::unordered_set<std::string> words;
    std::set<std::string> abbreviations;

    /// Reads stopwords.txt, punctuation.txt, prefixes.txt, synonyms.tsv,
    /// words.txt and abbreviations.txt from `dir`.
    static TextResources load(const std::filesystem::path& dir);
    /// The bundled data/dict directory, loaded once.
    static const TextResources& bundled();
};

std::filesystem::path bundled_data_dir();

/// Reads a list file: trims each line, drops blanks and `#` comments.
std::vector<std::string> read_list_file(const std::filesystem::path& path);

struct Sentence {
    std::string text;
    std::string separator;  // whitespace that followed it in the passage
};

struct SplitPassage {
    std::string leading;  // whitespace before the first sentence
    std::vector<Sentence> sentences;

    std::string join() const;
};

/// Splits on `.`, `!` or `?` (plus closing quotes/brackets) followed by
/// whitespace and an uppercase letter, digit or opening mark, and on blank
/// lines. A period after a listed abbreviation or a single letter does not
/// end a sentence.
SplitPassage split_sentences(std::string_view passage, const std::set<std::string>& abbreviations);

struct WordSpan {
    std::size_t begin;
    std::size_t end;
};

/// Next maximal run of ASCII letters starting at or after `from` that is not
/// fused to digits, non-ASCII bytes, underscores or apostrophes.
bool next_alpha_word(std::string_view text, std::size_t from, WordSpan& out);

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_ascii_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ascii_upper(char c) { return c >= 'A' && c <= 'Z'; }
inline bool is_ascii_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string to_lower_ascii(std::string_view s);

/// Copies the capitalization pattern of `model` (all caps, leading capital
/// or as-is) onto `word`.
std::string match_case(std::string_view model, std::string_view word);

}  // namespace qcopt
