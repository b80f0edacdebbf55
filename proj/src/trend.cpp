#include "hostility/trend.hpp"

#include "hostility/error.hpp"
#include "hostility/eval.hpp"
#include "hostility/io.hpp"

#include <algorithm>
#include <sstream>

namespace hostility {

Eigen::Vector4d trend_features(std::span<const double> p, double threshold)
{
    if (p.empty()) {
        throw DataError("trend features need at least one posterior");
    }
    double above = 0.0;
    double rise = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] > threshold) {
            above += 1.0;
        }
        if (i > 0) {
            rise = i == 1 ? p[1] - p[0] : std::max(rise, p[i] - p[i - 1]);
        }
    }
    const auto [lo, hi] = std::minmax_element(p.begin(), p.end());
    return {above, above / static_cast<double>(p.size()), rise, *hi - *lo};
}

struct CommentScorer::Trained {
    Vocabulary vocab;
    LinearModel model;
};

CommentScorer::CommentScorer(const Corpus& corpus, const TokenizedCorpus& tokens, const Lexicons& lexicons,
                             const EmbeddingTable* subwords, CommentModelOptions options)
    : corpus_(&corpus), tokens_(&tokens), lexicons_(&lexicons), subwords_(subwords), options_(options)
{
    if (options_.inner_folds < 2) {
        throw ConfigError("inner fold count must be >= 2");
    }
    if (subwords_) {
        lookup_ = std::make_unique<CachedLookup>(*subwords_);
    }
    labels_.resize(corpus.size());
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        for (const auto& c : corpus.post(p).comments) {
            labels_[p].push_back(c.hostile ? 1 : 0);
        }
    }
}

CommentScorer::~CommentScorer() = default;

void CommentScorer::set_labels(std::vector<std::vector<int>> labels)
{
    if (labels.size() != corpus_->size()) {
        throw ConfigError("comment label table does not match the corpus");
    }
    for (std::size_t p = 0; p < labels.size(); ++p) {
        if (labels[p].size() != corpus_->post(p).comments.size()) {
            throw ConfigError("comment label table does not match post " + corpus_->post(p).id);
        }
    }
    labels_ = std::move(labels);
}

const Eigen::MatrixXd& CommentScorer::dense(std::size_t post)
{
    auto it = dense_.find(post);
    if (it != dense_.end()) {
        return it->second;
    }
    const auto& seqs = tokens_->post_tokens(post);
    const Eigen::Index emb = subwords_ ? 2 * subwords_->dimension() : 0;
    Eigen::MatrixXd m(static_cast<Eigen::Index>(seqs.size()), emb + kLexiconWidth);
    for (std::size_t c = 0; c < seqs.size(); ++c) {
        const auto r = static_cast<Eigen::Index>(c);
        if (lookup_) {
            m.row(r).head(emb) = embed_aggregate(seqs[c], *lookup_).transpose();
        }
        m.row(r).tail(kLexiconWidth) = lexicon_features(seqs[c], *lexicons_).transpose();
    }
    return dense_.emplace(post, std::move(m)).first->second;
}

SparseRows CommentScorer::unigrams(std::span<const std::size_t> posts, const Vocabulary& vocab) const
{
    std::vector<Eigen::Triplet<double>> triplets;
    Eigen::Index row = 0;
    for (auto p : posts) {
        for (const auto& seq : tokens_->post_tokens(p)) {
            for (const auto& tok : seq) {
                if (auto j = vocab.find(tok)) {
                    triplets.emplace_back(row, *j, 1.0);
                }
            }
            ++row;
        }
    }
    SparseRows x(row, static_cast<Eigen::Index>(vocab.size()));
    x.setFromTriplets(triplets.begin(), triplets.end());
    return x;
}

int CommentScorer::train(std::span<const std::size_t> posts, int outer_fold, int inner_fold)
{
    std::vector<std::size_t> sorted(posts.begin(), posts.end());
    std::sort(sorted.begin(), sorted.end());

    VocabularyCounter counter;
    std::vector<int> y;
    Eigen::Index rows = 0;
    for (auto p : sorted) {
        for (const auto& seq : tokens_->post_tokens(p)) {
            counter.add(seq);
        }
        const auto& l = labels_.at(p);
        y.insert(y.end(), l.begin(), l.end());
        rows += static_cast<Eigen::Index>(l.size());
    }

    Trained trained;
    trained.vocab = counter.finish(options_.min_count);
    const Eigen::Index emb = subwords_ ? 2 * subwords_->dimension() : 0;
    Eigen::MatrixXd x_dense(rows, emb + kLexiconWidth);
    Eigen::Index r = 0;
    for (auto p : sorted) {
        const auto& d = dense(p);
        x_dense.middleRows(r, d.rows()) = d;
        r += d.rows();
    }
    const SparseRows x_sparse = unigrams(sorted, trained.vocab);

    ModelSchema schema;
    for (const auto& tok : trained.vocab.tokens()) {
        schema.names.push_back("U:" + tok);
    }
    for (Eigen::Index i = 0; i < emb; ++i) {
        schema.names.push_back((i < emb / 2 ? "n-w2v:max" : "n-w2v:avg") + std::to_string(i % (emb / 2)));
    }
    for (const auto& n : lexicon_feature_names()) {
        schema.names.push_back("lex:" + n);
    }
    schema.standardized.assign(schema.names.size(), true);
    std::fill(schema.standardized.begin(), schema.standardized.begin() + static_cast<std::ptrdiff_t>(trained.vocab.size()),
              false);
    std::string joined;
    for (const auto& n : schema.names) {
        joined += n;
        joined += '\n';
    }
    schema.fingerprint = sha256_hex(joined).substr(0, 16);

    try {
        trained.model = hostility::train(x_sparse, x_dense, y, schema, options_.train);
    } catch (const DataError& e) {
        throw DataError(std::string("comment model: ") + e.what());
    }

    const int id = static_cast<int>(registry_.size());
    registry_.push_back({id, outer_fold, inner_fold, std::move(sorted)});
    models_.push_back(std::move(trained));
    return id;
}

std::vector<double> CommentScorer::score(int id, std::size_t post)
{
    const auto& t = models_.at(static_cast<std::size_t>(id));
    const std::size_t one[] = {post};
    const Eigen::VectorXd p = predict_proba(t.model, unigrams(one, t.vocab), dense(post), t.model.schema.fingerprint);
    return {p.data(), p.data() + p.size()};
}

const LinearModel& CommentScorer::model(int id) const
{
    return models_.at(static_cast<std::size_t>(id)).model;
}

namespace {

PosteriorSeries make_series(CommentScorer& scorer, int model, std::size_t post)
{
    PosteriorSeries s;
    s.post = post;
    s.posterior = scorer.score(model, post);
    s.model.assign(s.posterior.size(), model);
    return s;
}

} // namespace

PosteriorMap score_comments_cv(CommentScorer& scorer, std::span<const std::size_t> posts, int folds, int outer_fold)
{
    std::vector<int> hostile;
    for (auto p : posts) {
        const auto& l = scorer.labels(p);
        hostile.push_back(std::find(l.begin(), l.end(), 1) != l.end() ? 1 : 0);
    }
    const auto plan =
        make_folds(hostile, folds, scorer.options().seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(outer_fold + 2)));

    PosteriorMap out;
    for (int f = 0; f < folds; ++f) {
        std::vector<std::size_t> train_posts;
        std::vector<std::size_t> test_posts;
        for (std::size_t i = 0; i < posts.size(); ++i) {
            (plan.fold_of[i] == f ? test_posts : train_posts).push_back(posts[i]);
        }
        if (test_posts.empty()) {
            continue;
        }
        const int id = scorer.train(train_posts, outer_fold, f);
        for (auto p : test_posts) {
            out.emplace(p, make_series(scorer, id, p));
        }
    }
    return out;
}

DoubleCvResult score_comments_double_cv(CommentScorer& scorer, std::span<const std::size_t> posts,
                                        std::span<const int> outer_fold_of, int outer_folds)
{
    if (posts.size() != outer_fold_of.size()) {
        throw ConfigError("outer fold assignment does not match the post list");
    }
    DoubleCvResult result;
    result.posts.assign(posts.begin(), posts.end());
    result.fold_of.assign(outer_fold_of.begin(), outer_fold_of.end());
    std::vector<double> pooled;
    std::vector<int> pooled_labels;
    for (int f = 0; f < outer_folds; ++f) {
        std::vector<std::size_t> train_posts;
        std::vector<std::size_t> test_posts;
        for (std::size_t i = 0; i < posts.size(); ++i) {
            (outer_fold_of[i] == f ? test_posts : train_posts).push_back(posts[i]);
        }
        PosteriorMap map = score_comments_cv(scorer, train_posts, scorer.options().inner_folds, f);
        const int outer_model = scorer.train(train_posts, f, -1);
        for (auto p : test_posts) {
            auto s = make_series(scorer, outer_model, p);
            pooled.insert(pooled.end(), s.posterior.begin(), s.posterior.end());
            const auto& l = scorer.labels(p);
            pooled_labels.insert(pooled_labels.end(), l.begin(), l.end());
            map.emplace(p, std::move(s));
        }
        result.by_fold.push_back(std::move(map));
    }
    const auto positives = std::count(pooled_labels.begin(), pooled_labels.end(), 1);
    if (positives > 0 && positives < static_cast<std::ptrdiff_t>(pooled_labels.size())) {
        result.test_auc = auc(pooled, pooled_labels);
    }
    return result;
}

std::size_t audit_provenance(const DoubleCvResult& result, const std::vector<InnerModelRecord>& registry)
{
    std::size_t violations = 0;
    for (std::size_t f = 0; f < result.by_fold.size(); ++f) {
        std::vector<std::size_t> held_out;
        for (std::size_t i = 0; i < result.posts.size(); ++i) {
            if (result.fold_of[i] == static_cast<int>(f)) {
                held_out.push_back(result.posts[i]);
            }
        }
        for (const auto& [post, series] : result.by_fold[f]) {
            for (int id : series.model) {
                const auto& seen = registry.at(static_cast<std::size_t>(id)).training_posts;
                bool leak = std::binary_search(seen.begin(), seen.end(), post);
                for (auto h : held_out) {
                    leak = leak || std::binary_search(seen.begin(), seen.end(), h);
                }
                violations += leak ? 1 : 0;
            }
        }
    }
    return violations;
}

std::string posterior_dump_csv(const Corpus& corpus, const PosteriorMap& posteriors,
                               const std::vector<InnerModelRecord>& registry)
{
    std::ostringstream out;
    out << "post_id,comment_idx,posterior,fold_id\n";
    for (const auto& [post, series] : posteriors) {
        for (std::size_t c = 0; c < series.posterior.size(); ++c) {
            const auto& rec = registry.at(static_cast<std::size_t>(series.model[c]));
            out << corpus.post(post).id << ',' << c << ',' << format_double(series.posterior[c]) << ','
                << rec.inner_fold << '\n';
        }
    }
    return out.str();
}

} // namespace hostility
