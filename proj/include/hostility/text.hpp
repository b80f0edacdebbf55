#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace hostility {

/// Sentinel that replaces every @mention.
inline constexpr std::string_view kMentionToken = "MENTION";

using TokenSeq = std::vector<std::string>;

/// Lowercased word tokens; each emoji codepoint becomes its own token and
/// `@word` becomes MENTION. Variation selectors and ZWJ are dropped, so
/// multi-codepoint emoji split at codepoint level.
TokenSeq tokenize(std::string_view text);

bool contains_mention(const TokenSeq& tokens);

/// Token -> dense column index. Indices follow lexicographic token order.
class Vocabulary {
public:
    Vocabulary() = default;

    std::size_t size() const { return tokens_.size(); }
    bool empty() const { return tokens_.empty(); }
    std::size_t min_count() const { return min_count_; }
    const std::string& token(std::size_t i) const { return tokens_.at(i); }
    const std::vector<std::string>& tokens() const { return tokens_; }
    std::optional<Eigen::Index> find(const std::string& token) const;

    bool operator==(const Vocabulary& other) const { return tokens_ == other.tokens_; }

private:
    friend class VocabularyCounter;
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, Eigen::Index> index_;
    std::size_t min_count_ = 1;
};

/// Accumulates token frequencies, then freezes them into a Vocabulary.
class VocabularyCounter {
public:
    void add(const TokenSeq& tokens);
    Vocabulary finish(std::size_t min_count) const;

private:
    std::map<std::string, std::size_t> counts_;
};

Vocabulary build_vocab(std::span<const TokenSeq> sequences, std::size_t min_count);

inline constexpr std::array<std::string_view, 6> kHateCategories = {
    "class", "disability", "ethnicity", "gender", "nationality", "religion"};

/// Six hate-word categories plus a profanity list, all lowercase.
struct Lexicons {
    std::array<std::unordered_set<std::string>, 6> hate;
    std::unordered_set<std::string> profane;
};

/// Reads `<category>.txt` for each hate category and `profane.txt` from `dir`.
Lexicons load_lexicons(const std::filesystem::path& dir);
void save_lexicons(const Lexicons& lexicons, const std::filesystem::path& dir);

inline constexpr Eigen::Index kLexiconWidth = 9;
using LexiconVector = Eigen::Matrix<double, kLexiconWidth, 1>;

/// [hate binary per category (6), total hate hits, profane binary, profane count].
/// A token listed under several categories counts once per category.
LexiconVector lexicon_features(const TokenSeq& tokens, const Lexicons& lexicons);

std::vector<std::string> lexicon_feature_names();

} // namespace hostility
