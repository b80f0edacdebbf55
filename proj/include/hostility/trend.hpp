#pragma once

#include "hostility/corpus.hpp"
#include "hostility/embed.hpp"
#include "hostility/features.hpp"
#include "hostility/linmodel.hpp"
#include "hostility/text.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace hostility {

/// (count above threshold, fraction above threshold, max adjacent rise,
/// max - min). Throws DataError for an empty series.
Eigen::Vector4d trend_features(std::span<const double> posteriors, double threshold = 0.3);

/// Hostility posteriors for every comment of one post.
struct PosteriorSeries {
    std::size_t post = 0;
    std::vector<double> posterior; ///< aligned to comment order
    std::vector<int> model;        ///< id of the model that produced each value
};

/// Provenance of one comment-level model.
struct InnerModelRecord {
    int id = 0;
    int outer_fold = -1; ///< -1 outside double cross-validation
    int inner_fold = -1; ///< -1 for the model fit on the whole partition
    std::vector<std::size_t> training_posts; ///< sorted corpus indices
};

struct CommentModelOptions {
    int inner_folds = 5;
    std::size_t min_count = 2;
    TrainOptions train{0.01, 3000, 1e-5, true};
    std::uint64_t seed = 1;
};

/// Comment-level hostility classifier over single-comment unigram,
/// subword-embedding and lexicon features. Keeps a registry of every model
/// it trains together with the posts that model saw.
class CommentScorer {
public:
    /// `subwords` may be null, in which case the embedding block is dropped.
    CommentScorer(const Corpus& corpus, const TokenizedCorpus& tokens, const Lexicons& lexicons,
                  const EmbeddingTable* subwords, CommentModelOptions options = {});
    ~CommentScorer();
    CommentScorer(const CommentScorer&) = delete;
    CommentScorer& operator=(const CommentScorer&) = delete;

    const CommentModelOptions& options() const { return options_; }

    /// Replaces the comment labels (one vector per corpus post).
    void set_labels(std::vector<std::vector<int>> labels);
    const std::vector<int>& labels(std::size_t post) const { return labels_.at(post); }

    /// Trains on every comment of `posts`. Throws DataError when those
    /// comments hold a single class.
    int train(std::span<const std::size_t> posts, int outer_fold = -1, int inner_fold = -1);
    std::vector<double> score(int model, std::size_t post);

    const std::vector<InnerModelRecord>& registry() const { return registry_; }
    const LinearModel& model(int id) const;

private:
    struct Trained;
    const Eigen::MatrixXd& dense(std::size_t post);
    SparseRows unigrams(std::span<const std::size_t> posts, const Vocabulary& vocab) const;

    const Corpus* corpus_;
    const TokenizedCorpus* tokens_;
    const Lexicons* lexicons_;
    const EmbeddingTable* subwords_;
    std::unique_ptr<CachedLookup> lookup_;
    CommentModelOptions options_;
    std::vector<std::vector<int>> labels_;
    std::map<std::size_t, Eigen::MatrixXd> dense_;
    std::vector<InnerModelRecord> registry_;
    std::vector<Trained> models_;
};

/// Posterior series for a set of posts under one outer fold.
using PosteriorMap = std::map<std::size_t, PosteriorSeries>;

struct DoubleCvResult {
    /// by_fold[f] covers every post of the slice: posts outside fold f are
    /// scored by inner models, posts in fold f by the model fit on all
    /// posts outside it.
    std::vector<PosteriorMap> by_fold;
    std::vector<int> fold_of; ///< outer fold per slice entry
    std::vector<std::size_t> posts;
    /// Comment-level AUC of the outer-test posteriors pooled across folds.
    double test_auc = 0.5;
};

/// Double cross-validation over `posts` (corpus indices) with the given
/// outer fold per post. Model ids refer to `scorer.registry()`.
DoubleCvResult score_comments_double_cv(CommentScorer& scorer, std::span<const std::size_t> posts,
                                        std::span<const int> outer_fold_of, int outer_folds);

/// Single-level cross-validation: every post scored by a model that never
/// saw it. Folds are stratified on the post-level hostile flag.
PosteriorMap score_comments_cv(CommentScorer& scorer, std::span<const std::size_t> posts, int folds,
                               int outer_fold = -1);

/// Number of (fold, comment) posteriors whose model trained on the
/// comment's own post, or, under outer fold f, on any post of fold f.
std::size_t audit_provenance(const DoubleCvResult& result, const std::vector<InnerModelRecord>& registry);

/// CSV `post_id,comment_idx,posterior,fold_id` for one posterior map.
std::string posterior_dump_csv(const Corpus& corpus, const PosteriorMap& posteriors,
                               const std::vector<InnerModelRecord>& registry);

} // namespace hostility
