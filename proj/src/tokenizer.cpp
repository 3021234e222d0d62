#include "qcopt/tokenizer.hpp"

#include "qcopt/error.hpp"

#include <nlohmann/json.hpp>
#include <unicode/regex.h>
#include <unicode/utext.h>

#include <array>
#include <atomic>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#ifndef QCOPT_DATA_DIR
#define QCOPT_DATA_DIR "data"
#endif

namespace qcopt {

namespace {

// ICU's \s omits U+000B and U+0085; the reference regex engine treats both
// as whitespace, so the class is spelled out via the White_Space property.
std::string to_icu_dialect(std::string_view pattern) {
    std::string out;
    out.reserve(pattern.size() + 32);
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        if (pattern[i] == '\\' && i + 1 < pattern.size()) {
            const char next = pattern[i + 1];
            if (next == 's') {
                out += "\\p{White_Space}";
            } else if (next == 'S') {
                out += "\\P{White_Space}";
            } else {
                out += pattern[i];
                out += next;
            }
            ++i;
            continue;
        }
        out += pattern[i];
    }
    return out;
}

std::atomic<std::uint64_t> next_pattern_id{1};

}  // namespace

class CompiledPattern {
public:
    explicit CompiledPattern(const std::string& pattern) : id_(next_pattern_id++) {
        UErrorCode status = U_ZERO_ERROR;
        UParseError parse_error{};
        const std::string icu_pattern = to_icu_dialect(pattern);
        regex_.reset(icu::RegexPattern::compile(icu::UnicodeString::fromUTF8(icu_pattern), 0,
                                                parse_error, status));
        if (U_FAILURE(status)) {
            throw ValidationError("invalid pre-tokenization pattern (" +
                                  std::string(u_errorName(status)) + " at offset " +
                                  std::to_string(parse_error.offset) + ")");
        }
    }

    /// Calls `emit(begin, end)` with byte offsets of every match.
    template <typename Emit>
    void for_each_match(std::string_view text, Emit&& emit) const {
        icu::RegexMatcher& matcher = thread_matcher();
        UErrorCode status = U_ZERO_ERROR;
        UText* utext = utext_openUTF8(nullptr, text.data(), static_cast<int64_t>(text.size()), &status);
        if (U_FAILURE(status)) throw ValidationError("cannot open text for pre-tokenization");
        matcher.reset(utext);
        std::size_t covered = 0;
        while (matcher.find(status) && U_SUCCESS(status)) {
            const auto begin = static_cast<std::size_t>(matcher.start64(status));
            const auto end = static_cast<std::size_t>(matcher.end64(status));
            if (begin > covered) emit(covered, begin);  // bytes the pattern skipped
            if (end > begin) emit(begin, end);
            covered = std::max(covered, end);
        }
        matcher.reset(icu::UnicodeString());
        utext_close(utext);
        if (U_FAILURE(status)) throw ValidationError("pre-tokenization failed");
        if (covered < text.size()) emit(covered, text.size());
    }

private:
    icu::RegexMatcher& thread_matcher() const {
        thread_local std::unordered_map<std::uint64_t, std::unique_ptr<icu::RegexMatcher>> cache;
        auto& slot = cache[id_];
        if (!slot) {
            UErrorCode status = U_ZERO_ERROR;
            slot.reset(regex_->matcher(status));
            if (U_FAILURE(status)) throw ValidationError("cannot create regex matcher");
        }
        return *slot;
    }

    std::uint64_t id_;
    std::unique_ptr<icu::RegexPattern> regex_;
};

TokenVocabulary::TokenVocabulary(std::string name, std::vector<Entry> entries, std::string pattern,
                                 std::map<std::string, TokenId> special_tokens)
    : name_(std::move(name)), pattern_(std::move(pattern)), special_(std::move(special_tokens)) {
    encoder_.reserve(entries.size());
    decoder_.reserve(entries.size());
    for (auto& entry : entries) {
        if (entry.bytes.empty()) {
            throw ValidationError("vocabulary '" + name_ + "': empty byte sequence for rank " +
                                  std::to_string(entry.rank));
        }
        if (!decoder_.emplace(entry.rank, entry.bytes).second) {
            throw ValidationError("vocabulary '" + name_ + "': duplicate rank " +
                                  std::to_string(entry.rank));
        }
        if (!encoder_.emplace(std::move(entry.bytes), entry.rank).second) {
            throw ValidationError("vocabulary '" + name_ + "': duplicate byte sequence at rank " +
                                  std::to_string(entry.rank));
        }
    }
    for (int b = 0; b < 256; ++b) {
        const char byte = static_cast<char>(b);
        if (encoder_.find(std::string_view(&byte, 1)) == encoder_.end()) {
            throw ValidationError("vocabulary '" + name_ + "': no single-byte coverage for byte " +
                                  std::to_string(b));
        }
    }
    compiled_ = std::make_shared<const CompiledPattern>(pattern_);
}

const TokenId* TokenVocabulary::find(std::string_view bytes) const {
    auto it = encoder_.find(bytes);
    return it == encoder_.end() ? nullptr : &it->second;
}

std::string_view TokenVocabulary::bytes_of(TokenId id) const {
    auto it = decoder_.find(id);
    if (it != decoder_.end()) return it->second;
    for (const auto& [text, special] : special_) {
        if (special == id) return text;
    }
    throw ValidationError("unknown token id " + std::to_string(id));
}

std::string base64_decode(std::string_view encoded) {
    static const std::array<int, 256> table = [] {
        std::array<int, 256> t{};
        t.fill(-1);
        const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
        for (int i = 0; i < 64; ++i) t[static_cast<unsigned char>(alphabet[i])] = i;
        return t;
    }();
    if (encoded.size() % 4 != 0) throw ValidationError("base64 length is not a multiple of 4");
    std::string out;
    out.reserve(encoded.size() / 4 * 3);
    for (std::size_t i = 0; i < encoded.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            const char c = encoded[i + k];
            if (c == '=' && i + 4 == encoded.size() && k >= 2) {
                vals[k] = 0;
                ++pad;
            } else {
                if (pad > 0) throw ValidationError("base64 padding in the middle of a quantum");
                vals[k] = table[static_cast<unsigned char>(c)];
                if (vals[k] < 0) throw ValidationError("invalid base64 character");
            }
        }
        const std::uint32_t quantum = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) | vals[3];
        out += static_cast<char>((quantum >> 16) & 0xFF);
        if (pad < 2) out += static_cast<char>((quantum >> 8) & 0xFF);
        if (pad < 1) out += static_cast<char>(quantum & 0xFF);
    }
    return out;
}

std::string base64_encode(std::string_view bytes) {
    static const char* alphabet = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    std::size_t i = 0;
    for (; i + 2 < bytes.size(); i += 3) {
        const std::uint32_t q = (static_cast<unsigned char>(bytes[i]) << 16) |
                                (static_cast<unsigned char>(bytes[i + 1]) << 8) |
                                static_cast<unsigned char>(bytes[i + 2]);
        out += alphabet[(q >> 18) & 63];
        out += alphabet[(q >> 12) & 63];
        out += alphabet[(q >> 6) & 63];
        out += alphabet[q & 63];
    }
    if (i < bytes.size()) {
        std::uint32_t q = static_cast<unsigned char>(bytes[i]) << 16;
        if (i + 1 < bytes.size()) q |= static_cast<unsigned char>(bytes[i + 1]) << 8;
        out += alphabet[(q >> 18) & 63];
        out += alphabet[(q >> 12) & 63];
        out += i + 1 < bytes.size() ? alphabet[(q >> 6) & 63] : '=';
        out += '=';
    }
    return out;
}

namespace {

std::vector<TokenVocabulary::Entry> parse_entries(std::string_view content, const std::string& name) {
    std::vector<TokenVocabulary::Entry> entries;
    std::unordered_map<TokenId, std::size_t> seen_rank;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < content.size()) {
        std::size_t end = content.find('\n', pos);
        if (end == std::string_view::npos) end = content.size();
        std::string_view line = content.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;

        const auto space = line.find(' ');
        const auto fail = [&](const std::string& why) {
            return ValidationError("vocabulary '" + name + "' line " + std::to_string(line_no) +
                                   ": " + why);
        };
        if (space == std::string_view::npos || space == 0 || space + 1 >= line.size()) {
            throw fail("expected '<base64> <rank>'");
        }
        const auto rank_text = line.substr(space + 1);
        TokenId rank = 0;
        const auto [ptr, ec] = std::from_chars(rank_text.data(), rank_text.data() + rank_text.size(), rank);
        if (ec != std::errc() || ptr != rank_text.data() + rank_text.size()) {
            throw fail("malformed rank '" + std::string(rank_text) + "'");
        }
        std::string bytes;
        try {
            bytes = base64_decode(line.substr(0, space));
        } catch (const ValidationError& e) {
            throw fail(e.what());
        }
        if (auto [it, inserted] = seen_rank.emplace(rank, line_no); !inserted) {
            throw fail("duplicate rank " + std::to_string(rank) + " (first seen on line " +
                       std::to_string(it->second) + ")");
        }
        entries.push_back({std::move(bytes), rank});
    }
    if (entries.empty()) {
        throw ValidationError("vocabulary '" + name + "' is empty: no single-byte coverage");
    }
    return entries;
}

}  // namespace

TokenVocabulary parse_vocabulary(std::string_view content, std::string name, std::string pattern) {
    auto entries = parse_entries(content, name);
    return TokenVocabulary(std::move(name), std::move(entries), std::move(pattern));
}

TokenVocabulary load_vocabulary(const std::filesystem::path& path) {
    auto read_file = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        if (!in) throw ValidationError("cannot open vocabulary file '" + p.string() + "'");
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    if (path.extension() == ".json") {
        nlohmann::json config;
        try {
            config = nlohmann::json::parse(read_file(path));
        } catch (const nlohmann::json::exception& e) {
            throw ValidationError("vocabulary config '" + path.string() + "': " + e.what());
        }
        for (const auto& [key, _] : config.items()) {
            if (key != "name" && key != "ranks" && key != "pattern" && key != "special_tokens") {
                throw ValidationError("vocabulary config: unknown key '" + key + "'");
            }
        }
        if (!config.contains("ranks") || !config["ranks"].is_string()) {
            throw ValidationError("vocabulary config: 'ranks' path is required");
        }
        const auto ranks_path = path.parent_path() / config["ranks"].get<std::string>();
        const std::string name = config.value("name", ranks_path.stem().string());
        const std::string pattern = config.value("pattern", std::string(kCl100kPattern));
        std::map<std::string, TokenId> special;
        if (config.contains("special_tokens")) {
            for (const auto& [text, id] : config["special_tokens"].items()) {
                special.emplace(text, id.get<TokenId>());
            }
        }
        return TokenVocabulary(name, parse_entries(read_file(ranks_path), name), pattern,
                               std::move(special));
    }
    return parse_vocabulary(read_file(path), path.stem().string());
}

std::vector<std::string_view> pretokenize(std::string_view text, const TokenVocabulary& vocab) {
    std::vector<std::string_view> chunks;
    vocab.compiled().for_each_match(text, [&](std::size_t begin, std::size_t end) {
        chunks.push_back(text.substr(begin, end - begin));
    });
    return chunks;
}

std::vector<TokenId> encode_chunk(std::string_view piece, const TokenVocabulary& vocab) {
    if (piece.empty()) return {};
    if (const TokenId* whole = vocab.find(piece)) return {*whole};

    constexpr TokenId kNone = std::numeric_limits<TokenId>::max();
    // parts[i] = (start offset, rank of merging part i with part i+1)
    std::vector<std::pair<std::size_t, TokenId>> parts;
    parts.reserve(piece.size() + 1);
    auto rank_of = [&](std::size_t begin, std::size_t end) {
        const TokenId* r = vocab.find(piece.substr(begin, end - begin));
        return r ? *r : kNone;
    };
    std::pair<TokenId, std::size_t> min_rank{kNone, 0};
    for (std::size_t i = 0; i + 1 < piece.size(); ++i) {
        const TokenId r = rank_of(i, i + 2);
        if (r < min_rank.first) min_rank = {r, i};
        parts.emplace_back(i, r);
    }
    parts.emplace_back(piece.size() - 1, kNone);
    parts.emplace_back(piece.size(), kNone);

    auto merged_rank = [&](std::size_t i) {
        return i + 3 < parts.size() ? rank_of(parts[i].first, parts[i + 3].first) : kNone;
    };
    while (min_rank.first != kNone) {
        const std::size_t i = min_rank.second;
        if (i > 0) parts[i - 1].second = merged_rank(i - 1);
        parts[i].second = merged_rank(i);
        parts.erase(parts.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        min_rank = {kNone, 0};
        for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
            if (parts[p].second < min_rank.first) min_rank = {parts[p].second, p};
        }
    }

    std::vector<TokenId> out;
    out.reserve(parts.size() - 1);
    for (std::size_t p = 0; p + 1 < parts.size(); ++p) {
        const TokenId r = rank_of(parts[p].first, parts[p + 1].first);
        if (r == kNone) throw StructuralError("BPE produced a piece outside the vocabulary");
        out.push_back(r);
    }
    return out;
}

std::vector<TokenId> encode(std::string_view text, const TokenVocabulary& vocab) {
    std::vector<TokenId> out;
    vocab.compiled().for_each_match(text, [&](std::size_t begin, std::size_t end) {
        const auto tokens = encode_chunk(text.substr(begin, end - begin), vocab);
        out.insert(out.end(), tokens.begin(), tokens.end());
    });
    return out;
}

std::string decode(std::span<const TokenId> tokens, const TokenVocabulary& vocab) {
    std::string out;
    for (TokenId t : tokens) out += vocab.bytes_of(t);
    return out;
}

std::size_t count_tokens(std::string_view text, const TokenVocabulary& vocab) {
    std::size_t count = 0;
    vocab.compiled().for_each_match(text, [&](std::size_t begin, std::size_t end) {
        const auto chunk = text.substr(begin, end - begin);
        count += vocab.find(chunk) ? 1 : encode_chunk(chunk, vocab).size();
    });
    return count;
}

TokenVocabulary builtin_test_vocabulary() {
    std::vector<TokenVocabulary::Entry> entries;
    TokenId rank = 0;
    for (int b = 0; b < 256; ++b) entries.push_back({std::string(1, static_cast<char>(b)), rank++});
    // Merges are listed so that every entry is reachable through BPE.
    const char* merges[] = {
        "th", "he", "in", "er", "an", " t", " a", "on", "re", "at", "en", "nd", "ou", "es",
        "or", "is", "it", "ed", " s", " w", " c", " o", " b", " m", "ing", " th", "the",
        " the", " an", " and", " of", " to", " in", " is", " it", "ion", "ent", " on",
        "ar", "al", "st", "to", "of", " f",
    };
    for (const char* m : merges) entries.push_back({m, rank++});
    return TokenVocabulary("builtin-test", std::move(entries), std::string(kCl100kPattern));
}

std::filesystem::path default_vocabulary_path(const std::string& explicit_path) {
    if (!explicit_path.empty()) return explicit_path;
    if (const char* env = std::getenv(kVocabularyEnv); env && *env) return env;
    return std::filesystem::path(QCOPT_DATA_DIR) / "vocab" / "cl100k_base.json";
}

}  // namespace qcopt
