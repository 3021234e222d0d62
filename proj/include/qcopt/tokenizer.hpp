#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace qcopt {

using TokenId = std::uint32_t;

/// Pre-tokenization pattern of the cl100k_base vocabulary.
inline constexpr std::string_view kCl100kPattern =
    R"('(?i:[sdmt]|ll|ve|re)|[^\r\n\p{L}\p{N}]?+\p{L}++|\p{N}{1,3}+| ?[^\s\p{L}\p{N}]++[\r\n]*+|\s++$|\s*[\r\n]|\s+(?!\S)|\s)";

/// Environment variable naming the default vocabulary file.
inline constexpr const char* kVocabularyEnv = "QCOPT_VOCAB";

class CompiledPattern;

/// Byte-pair-encoding vocabulary: byte sequences ranked by merge priority
/// (the rank doubles as the token id) plus the pre-tokenization regex.
/// Immutable once built and safe to share across threads.
class TokenVocabulary {
public:
    struct Entry {
        std::string bytes;
        TokenId rank;
    };

    /// Validates that ranks are unique, byte sequences are unique and every
    /// single byte 0-255 has an entry. Throws ValidationError otherwise.
    TokenVocabulary(std::string name, std::vector<Entry> entries, std::string pattern,
                    std::map<std::string, TokenId> special_tokens = {});

    const std::string& name() const noexcept { return name_; }
    const std::string& pattern() const noexcept { return pattern_; }
    std::size_t size() const noexcept { return decoder_.size(); }
    const std::map<std::string, TokenId>& special_tokens() const noexcept { return special_; }

    /// Rank of an exact byte sequence, or nullptr.
    const TokenId* find(std::string_view bytes) const;
    /// Bytes of a token id; throws ValidationError for unknown ids.
    std::string_view bytes_of(TokenId id) const;

    const CompiledPattern& compiled() const noexcept { return *compiled_; }

private:
    struct Hash {
        using is_transparent = void;
        std::size_t operator()(std::string_view s) const noexcept {
            return std::hash<std::string_view>{}(s);
        }
    };

    std::string name_;
    std::string pattern_;
    std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> encoder_;
    std::unordered_map<TokenId, std::string> decoder_;
    std::map<std::string, TokenId> special_;
    std::shared_ptr<const CompiledPattern> compiled_;
};

/// Loads either a ranks file (lines of `<base64 bytes> <rank>`, paired with
/// the cl100k pattern) or a JSON config
/// `{"name", "ranks": <path relative to the config>, "pattern", "special_tokens"}`.
/// Throws ValidationError with the offending line number on malformed input.
TokenVocabulary load_vocabulary(const std::filesystem::path& path);

/// Parses ranks-file content; exposed for tests.
TokenVocabulary parse_vocabulary(std::string_view content, std::string name,
                                 std::string pattern = std::string(kCl100kPattern));

/// Splits `text` into pre-tokenization chunks (byte slices of `text`).
std::vector<std::string_view> pretokenize(std::string_view text, const TokenVocabulary& vocab);

/// BPE-encodes one chunk by repeatedly merging the lowest-ranked adjacent pair.
std::vector<TokenId> encode_chunk(std::string_view chunk, const TokenVocabulary& vocab);

/// Ordinary-text encoding: special-token strings are treated as plain text.
std::vector<TokenId> encode(std::string_view text, const TokenVocabulary& vocab);

std::string decode(std::span<const TokenId> tokens, const TokenVocabulary& vocab);

std::size_t count_tokens(std::string_view text, const TokenVocabulary& vocab);

/// ~300-entry vocabulary (all single bytes plus a few common English merges)
/// for tests that do not need the full cl100k file.
TokenVocabulary builtin_test_vocabulary();

/// Resolves the default vocabulary path: `explicit_path` if set, else the
/// QCOPT_VOCAB environment variable, else the bundled cl100k_base file.
std::filesystem::path default_vocabulary_path(const std::string& explicit_path = {});

/// Standard base64 decoding; throws ValidationError on malformed input.
std::string base64_decode(std::string_view encoded);
std::string base64_encode(std::string_view bytes);

}  // namespace qcopt
