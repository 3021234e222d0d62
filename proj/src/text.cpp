#include "qcopt/text.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>

#include "qcopt/error.hpp"

namespace qcopt {
namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_ascii_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_ascii_space(s.back())) s.remove_suffix(1);
    return s;
}

bool is_closing(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }
bool is_opening(char c) { return c == '"' || c == '\'' || c == '(' || c == '['; }

// Letters and dots immediately before position `dot`, lowercased ("e.g" in "e.g.").
std::string word_before(std::string_view text, std::size_t dot) {
    std::size_t b = dot;
    while (b > 0 && (is_ascii_alpha(text[b - 1]) || text[b - 1] == '.')) --b;
    return to_lower_ascii(text.substr(b, dot - b));
}

}  // namespace

std::filesystem::path bundled_data_dir() { return std::filesystem::path(QCOPT_DATA_DIR); }

std::vector<std::string> read_list_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        out.emplace_back(t);
    }
    return out;
}

TextResources TextResources::load(const std::filesystem::path& dir) {
    TextResources r;
    for (auto& w : read_list_file(dir / "stopwords.txt")) r.stopwords.insert(to_lower_ascii(w));
    for (auto& p : read_list_file(dir / "punctuation.txt")) {
        if (p.size() != 1) throw ValidationError("punctuation.txt: entries must be single characters, got '" + p + "'");
        r.punctuation.insert(p);
    }
    r.prefixes = read_list_file(dir / "prefixes.txt");
    for (auto& p : r.prefixes) p = to_lower_ascii(p);
    std::stable_sort(r.prefixes.begin(), r.prefixes.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
    for (auto& line : read_list_file(dir / "synonyms.tsv")) {
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ValidationError("synonyms.tsv: expected '<word>\\t<replacement>', got '" + line + "'");
        r.synonyms[to_lower_ascii(trim(std::string_view(line).substr(0, tab)))] =
            std::string(trim(std::string_view(line).substr(tab + 1)));
    }
    for (auto& w : read_list_file(dir / "words.txt")) r.words.insert(to_lower_ascii(w));
    for (auto& a : read_list_file(dir / "abbreviations.txt")) r.abbreviations.insert(to_lower_ascii(a));
    return r;
}

const TextResources& TextResources::bundled() {
    static const TextResources resources = load(bundled_data_dir() / "dict");
    return resources;
}

std::string SplitPassage::join() const {
    std::string out = leading;
    for (const auto& s : sentences) out += s.text + s.separator;
    return out;
}

SplitPassage split_sentences(std::string_view text, const std::set<std::string>& abbreviations) {
    SplitPassage out;
    std::size_t start = 0;
    while (start < text.size() && is_ascii_space(text[start])) ++start;
    out.leading = std::string(text.substr(0, start));

    auto emit = [&](std::size_t end, std::size_t next) {
        out.sentences.push_back({std::string(text.substr(start, end - start)), std::string(text.substr(end, next - end))});
        start = next;
    };

    std::size_t i = start;
    while (i < text.size()) {
        char c = text[i];
        if (c == '\n') {
            // Blank line: paragraph boundary.
            std::size_t j = i + 1;
            while (j < text.size() && (text[j] == ' ' || text[j] == '\t' || text[j] == '\r')) ++j;
            if (j < text.size() && text[j] == '\n' && i > start) {
                std::size_t end = i;
                while (end > start && is_ascii_space(text[end - 1])) --end;
                std::size_t next = j;
                while (next < text.size() && is_ascii_space(text[next])) ++next;
                emit(end, next);
                i = next;
                continue;
            }
        }
        if (c != '.' && c != '!' && c != '?') {
            ++i;
            continue;
        }
        std::size_t end = i;
        while (end < text.size() && (text[end] == '.' || text[end] == '!' || text[end] == '?')) ++end;
        while (end < text.size() && is_closing(text[end])) ++end;
        if (end < text.size() && !is_ascii_space(text[end])) {
            i = end;
            continue;
        }
        std::size_t next = end;
        while (next < text.size() && is_ascii_space(text[next])) ++next;
        if (next == text.size()) {
            emit(end, next);
            break;
        }
        char following = text[next];
        bool starts_sentence = is_ascii_upper(following) || is_ascii_digit(following) || is_opening(following);
        if (starts_sentence && c == '.') {
            std::string before = word_before(text, i);
            bool single_letter = before.size() == 1 || (before.size() >= 2 && before[before.size() - 2] == '.');
            if (single_letter || abbreviations.count(before)) starts_sentence = false;
        }
        if (starts_sentence) {
            emit(end, next);
            i = next;
        } else {
            i = end;
        }
    }
    if (start < text.size()) {
        std::size_t end = text.size();
        while (end > start && is_ascii_space(text[end - 1])) --end;
        emit(end, text.size());
    }
    return out;
}

bool next_alpha_word(std::string_view text, std::size_t from, WordSpan& out) {
    auto glued = [](unsigned char c) { return c >= 0x80 || is_ascii_digit(static_cast<char>(c)) || c == '_' || c == '\''; };
    std::size_t i = from;
    while (i < text.size() && i > 0 && is_ascii_alpha(text[i]) && is_ascii_alpha(text[i - 1])) ++i;
    while (true) {
        while (i < text.size() && !is_ascii_alpha(text[i])) ++i;
        if (i >= text.size()) return false;
        std::size_t e = i;
        while (e < text.size() && is_ascii_alpha(text[e])) ++e;
        // Letters fused with digits, non-ASCII text or apostrophes are not words here.
        bool fused = (i > 0 && glued(static_cast<unsigned char>(text[i - 1]))) ||
                     (e < text.size() && glued(static_cast<unsigned char>(text[e])));
        if (!fused) {
            out = {i, e};
            return true;
        }
        i = e;
    }
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (auto& c : out)
        if (is_ascii_upper(c)) c = static_cast<char>(c - 'A' + 'a');
    return out;
}

std::string match_case(std::string_view model, std::string_view word) {
    std::string out(word);
    if (model.empty() || out.empty()) return out;
    bool all_upper = model.size() > 1 && std::all_of(model.begin(), model.end(), [](char c) { return !is_ascii_alpha(c) || is_ascii_upper(c); });
    if (all_upper) {
        for (auto& c : out)
            if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
    } else if (is_ascii_upper(model.front()) && out.front() >= 'a' && out.front() <= 'z') {
        out.front() = static_cast<char>(out.front() - 'a' + 'A');
    }
    return out;
}

}  // namespace qcopt
