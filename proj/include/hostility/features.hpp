#pragma once

#include "hostility/corpus.hpp"
#include "hostility/embed.hpp"
#include "hostility/text.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <bitset>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hostility {

/// Feature groups, in canonical layout order.
enum class Group : int { U = 0, Lex, W2v, NW2v, FinalCom, PrevCom, PrevPost, Trend, User };

inline constexpr std::array<Group, 9> kAllGroups = {Group::U,        Group::Lex,     Group::W2v,
                                                    Group::NW2v,     Group::FinalCom, Group::PrevCom,
                                                    Group::PrevPost, Group::Trend,   Group::User};

std::string_view group_name(Group g);
/// Throws ConfigError for unknown names.
Group parse_group(std::string_view name);

/// A set of groups; iteration is always in canonical order.
class GroupSet {
public:
    GroupSet() = default;
    GroupSet(std::initializer_list<Group> groups);

    void insert(Group g) { bits_.set(static_cast<std::size_t>(g)); }
    void erase(Group g) { bits_.reset(static_cast<std::size_t>(g)); }
    bool contains(Group g) const { return bits_.test(static_cast<std::size_t>(g)); }
    bool empty() const { return bits_.none(); }
    std::size_t size() const { return bits_.count(); }
    std::vector<Group> groups() const;

    /// "U+lex+trend" style name in canonical order.
    std::string name() const;
    /// Parses "U+prev-post" (also accepts ',' separators).
    static GroupSet parse(std::string_view spec);
    static GroupSet all();

    bool operator==(const GroupSet&) const = default;

private:
    std::bitset<9> bits_;
};

inline constexpr Eigen::Index kTrendWidth = 4;
inline constexpr Eigen::Index kUserWidth = 2;

struct FeatureBlock {
    Group group;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
};

/// Column layout for a fixed (vocabulary, groups, embedding dimension).
///
/// Composite groups (final-com, prev-com, prev-post) hold a unigram block,
/// an n-gram-embedding block and the lexicon block; the two history groups
/// end with a missing-history indicator. Unigram columns are the only ones
/// not standardized by the linear model.
class FeatureLayout {
public:
    FeatureLayout(GroupSet groups, const Vocabulary& vocab, int embed_dim);

    const GroupSet& groups() const { return groups_; }
    Eigen::Index dimension() const { return dimension_; }
    const std::vector<FeatureBlock>& blocks() const { return blocks_; }
    std::optional<FeatureBlock> block(Group g) const;
    Group group_of(Eigen::Index column) const;
    const std::string& name(Eigen::Index column) const { return names_.at(static_cast<std::size_t>(column)); }
    const std::vector<std::string>& names() const { return names_; }
    /// True for columns that are z-scored at training time.
    const std::vector<bool>& standardized() const { return standardized_; }
    /// Digest of the column names; models refuse inputs with another fingerprint.
    const std::string& fingerprint() const { return fingerprint_; }
    int embed_dim() const { return embed_dim_; }
    Eigen::Index vocab_size() const { return vocab_size_; }

private:
    GroupSet groups_;
    int embed_dim_;
    Eigen::Index vocab_size_;
    Eigen::Index dimension_ = 0;
    std::vector<FeatureBlock> blocks_;
    std::vector<std::string> names_;
    std::vector<bool> standardized_;
    std::string fingerprint_;
};

struct FeatureVector {
    std::shared_ptr<const FeatureLayout> layout;
    Eigen::SparseVector<double> values;
};

/// Token counts over `tokens`; out-of-vocabulary tokens are ignored.
Eigen::SparseVector<double> bow(const TokenSeq& tokens, const Vocabulary& vocab);

/// Tokenized comment text for every comment in a corpus.
class TokenizedCorpus {
public:
    explicit TokenizedCorpus(const Corpus& corpus);
    const TokenSeq& tokens(std::size_t post, std::size_t comment) const { return tokens_.at(post).at(comment); }
    const std::vector<TokenSeq>& post_tokens(std::size_t post) const { return tokens_.at(post); }

private:
    std::vector<std::vector<TokenSeq>> tokens_;
};

/// The raw token material each feature group is computed from, for a post
/// observed through its first `k` comments.
struct FeatureSources {
    std::size_t post = 0;
    std::size_t k = 0;
    TokenSeq observed;      ///< first k comments concatenated
    TokenSeq final_comment; ///< comment k
    TokenSeq prev_comments; ///< latest outside comment of each distinct observed author
    bool prev_comments_missing = true;
    TokenSeq prev_post; ///< all comments of the author's most recent earlier post
    bool prev_post_missing = true;
    Eigen::Vector2d user_activity = Eigen::Vector2d::Zero();
};

/// Throws DataError when k is zero or exceeds the comment count.
FeatureSources extract_sources(const Corpus& corpus, const TokenizedCorpus& tokens, std::size_t post, std::size_t k);

/// (unique authors / k, fraction of the k comments that contain a mention).
Eigen::Vector2d user_activity_features(const Corpus& corpus, const TokenizedCorpus& tokens, std::size_t post,
                                       std::size_t k);

/// Vocabulary-independent dense blocks of a FeatureSources, cached so that
/// per-fold assembly only redoes the unigram part.
struct DenseSources {
    LexiconVector lex_observed = LexiconVector::Zero();
    Eigen::VectorXd w2v_observed;
    Eigen::VectorXd nw2v_observed;
    LexiconVector lex_final = LexiconVector::Zero();
    Eigen::VectorXd nw2v_final;
    LexiconVector lex_prev_comments = LexiconVector::Zero();
    Eigen::VectorXd nw2v_prev_comments;
    LexiconVector lex_prev_post = LexiconVector::Zero();
    Eigen::VectorXd nw2v_prev_post;
};

struct EmbeddingLookups {
    CachedLookup* words = nullptr;    ///< required for the w2v group
    CachedLookup* subwords = nullptr; ///< required for n-w2v and the composite groups
};

DenseSources compute_dense(const FeatureSources& sources, const Lexicons& lexicons, const GroupSet& groups,
                           EmbeddingLookups lookups, int embed_dim);

/// Builds the vector for `layout`. `posteriors` must hold one value per
/// observed comment when the trend group is present.
FeatureVector assemble(const std::shared_ptr<const FeatureLayout>& layout, const FeatureSources& sources,
                       const DenseSources& dense, const Vocabulary& vocab, std::span<const double> posteriors = {},
                       double trend_threshold = 0.3);

struct FeatureResources {
    const Corpus* corpus = nullptr;
    const TokenizedCorpus* tokens = nullptr;
    const Vocabulary* vocab = nullptr;
    const Lexicons* lexicons = nullptr;
    const EmbeddingTable* words = nullptr;
    const EmbeddingTable* subwords = nullptr;
    int embed_dim = 100;
    double trend_threshold = 0.3;
};

/// One-shot assembly for a single (post, k). Throws ConfigError when a
/// requested group lacks its resource.
FeatureVector assemble(std::size_t post, std::size_t k, const GroupSet& groups, const FeatureResources& resources,
                       std::span<const double> posteriors = {});

/// Stacks feature vectors into a row-major sparse design matrix.
Eigen::SparseMatrix<double, Eigen::RowMajor> stack_rows(std::span<const FeatureVector> rows);

/// CSV `group,index,name,value` of the nonzero entries.
std::string feature_dump_csv(const FeatureVector& v);

} // namespace hostility
