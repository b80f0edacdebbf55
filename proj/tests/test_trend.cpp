#include "hostility/error.hpp"
#include "hostility/eval.hpp"
#include "hostility/synth.hpp"
#include "hostility/trend.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>
#include <sstream>

using namespace hostility;
using hostility::testing::test_lexicons;

namespace {

struct Small {
    Corpus corpus;
    TokenizedCorpus tokens;
    std::vector<std::size_t> posts;
    std::vector<int> fold_of;

    Small() : corpus(make()), tokens(corpus)
    {
        std::vector<int> hostile;
        for (std::size_t p = 0; p < corpus.size(); ++p) {
            posts.push_back(p);
            hostile.push_back(corpus.post(p).first_hostile() ? 1 : 0);
        }
        fold_of = make_folds(hostile, 3, 5).fold_of;
    }

    static Corpus make()
    {
        SynthConfig cfg;
        cfg.n_posts = 150;
        cfg.seed = 3;
        return generate_synthetic(cfg).corpus;
    }
};

const SynthResult& lexicon_source()
{
    static const SynthResult r = [] {
        SynthConfig cfg;
        cfg.n_posts = 1;
        return generate_synthetic(cfg);
    }();
    return r;
}

} // namespace

TEST_CASE("trend feature examples")
{
    const auto a = trend_features(std::vector<double>{0.1, 0.2, 0.9});
    CHECK(a(0) == 1.0);
    CHECK(a(1) == doctest::Approx(1.0 / 3.0));
    CHECK(a(2) == doctest::Approx(0.7));
    CHECK(a(3) == doctest::Approx(0.8));
    CHECK(trend_features(std::vector<double>{0.4, 0.4}) == Eigen::Vector4d(2, 1, 0, 0));
    CHECK(trend_features(std::vector<double>{0.2}) == Eigen::Vector4d::Zero());
    CHECK_THROWS_AS(trend_features(std::vector<double>{}), DataError);
    // A falling series has a negative largest rise.
    CHECK(trend_features(std::vector<double>{0.9, 0.5, 0.2})(2) == doctest::Approx(-0.3));
}

TEST_CASE("trend feature properties")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> p(1 + rep % 12);
        for (auto& v : p) {
            v = unit(rng);
        }
        const auto f = trend_features(p);
        CHECK(f(2) <= f(3) + 1e-15);
        CHECK(f(1) >= 0.0);
        CHECK(f(1) <= 1.0);
        CHECK(f(0) == doctest::Approx(f(1) * static_cast<double>(p.size())));
    }
}

TEST_CASE("double cross-validation keeps held-out posts unseen")
{
    const Small s;
    CommentScorer scorer(s.corpus, s.tokens, lexicon_source().lexicons, nullptr);
    const auto result = score_comments_double_cv(scorer, s.posts, s.fold_of, 3);
    REQUIRE(result.by_fold.size() == 3);
    for (const auto& map : result.by_fold) {
        CHECK(map.size() == s.posts.size());
    }
    // 3 outer folds x (5 inner + 1 outer) models.
    CHECK(scorer.registry().size() == 18);
    CHECK(audit_provenance(result, scorer.registry()) == 0);
    CHECK(result.test_auc >= 0.75);

    SUBCASE("the audit catches a planted leak")
    {
        auto leaky = result;
        int outer1 = -1;
        for (const auto& r : scorer.registry()) {
            if (r.outer_fold == 1 && r.inner_fold == -1) {
                outer1 = r.id;
            }
        }
        REQUIRE(outer1 >= 0);
        // Fold 1's outer model trained on fold 0's held-out posts.
        auto& series = leaky.by_fold[0].begin()->second;
        series.model[0] = outer1;
        CHECK(audit_provenance(leaky, scorer.registry()) == 1);
    }
    SUBCASE("posterior dump")
    {
        const auto csv = posterior_dump_csv(s.corpus, result.by_fold[0], scorer.registry());
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line);
        CHECK(line == "post_id,comment_idx,posterior,fold_id");
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            ++rows;
        }
        std::size_t comments = 0;
        for (const auto& [post, series] : result.by_fold[0]) {
            comments += series.posterior.size();
        }
        CHECK(rows == comments);
    }
}

TEST_CASE("permuted comment labels give chance-level posteriors")
{
    const Small s;
    CommentScorer scorer(s.corpus, s.tokens, lexicon_source().lexicons, nullptr);
    std::vector<int> flat;
    for (auto p : s.posts) {
        for (const auto& c : s.corpus.post(p).comments) {
            flat.push_back(c.hostile ? 1 : 0);
        }
    }
    std::mt19937_64 rng(9);
    std::shuffle(flat.begin(), flat.end(), rng);
    std::vector<std::vector<int>> labels;
    std::size_t at = 0;
    for (auto p : s.posts) {
        const auto n = s.corpus.post(p).comments.size();
        labels.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(at),
                            flat.begin() + static_cast<std::ptrdiff_t>(at + n));
        at += n;
    }
    scorer.set_labels(std::move(labels));
    const auto result = score_comments_double_cv(scorer, s.posts, s.fold_of, 3);
    CHECK(std::abs(result.test_auc - 0.5) <= 0.05);
}

TEST_CASE("scorer input errors")
{
    const Small s;
    CommentScorer scorer(s.corpus, s.tokens, test_lexicons(), nullptr);
    CHECK_THROWS(scorer.set_labels({}));
    std::vector<std::size_t> quiet;
    for (auto p : s.posts) {
        if (!s.corpus.post(p).first_hostile()) {
            quiet.push_back(p);
        }
    }
    REQUIRE_FALSE(quiet.empty());
    CHECK_THROWS_AS(scorer.train(quiet), DataError);
    CHECK_THROWS_AS(score_comments_double_cv(scorer, s.posts, std::vector<int>{0}, 3), ConfigError);
}
