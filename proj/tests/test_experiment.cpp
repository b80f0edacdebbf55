#include "hostility/error.hpp"
#include "hostility/experiment.hpp"
#include "hostility/synth.hpp"

#include "support.hpp"

#include <doctest.h>

#include <map>
#include <random>

using namespace hostility;
using hostility::testing::make_comment;
using hostility::testing::make_post;
using hostility::testing::test_lexicons;
using hostility::testing::timed_post;

namespace {

constexpr double kHour = 3600.0;

// Hostile posts turn hostile at comment 6 (t = 7 h) and carry the marker
// "zebra" in some of their early comments. Quiet posts never do.
Corpus planted_corpus(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution word(0.5);
    std::vector<Post> posts;
    for (int p = 0; p < 120; ++p) {
        const bool hostile = p % 2 == 0;
        std::vector<Comment> comments;
        for (int i = 0; i < 10; ++i) {
            std::string text = word(rng) ? "nice photo" : "great shot";
            if (hostile && i < 5 && word(rng)) {
                text += " zebra";
            }
            const bool h = hostile && i >= 6 && i % 2 == 0;
            comments.push_back(make_comment("c" + std::to_string(i), "u" + std::to_string((p + i) % 17),
                                            h ? "you suck" : text, kHour * (i + 1), h));
        }
        posts.push_back(make_post("p" + std::to_string(p), "a" + std::to_string(p % 9), 1000.0 * p, comments));
    }
    return Corpus(std::move(posts));
}

struct Bench {
    Corpus corpus;
    TokenizedCorpus tokens;
    FeatureCache cache;

    explicit Bench(Corpus c)
        : corpus(std::move(c)), tokens(corpus), cache(ExperimentResources{&corpus, &tokens, &test_lexicons()})
    {
    }
};

ExperimentOptions small_options()
{
    ExperimentOptions o;
    o.folds = 5;
    return o;
}

} // namespace

TEST_CASE("build_task1 examples")
{
    // Hostile at 5 h, lead 3 h, comments at 0.5 h, 1 h, 4 h.
    const Corpus c({make_post("h", "a", 0,
                              {make_comment("c0", "u", "x", 0.5 * kHour), make_comment("c1", "u", "x", 1 * kHour),
                               make_comment("c2", "u", "x", 4 * kHour), make_comment("c3", "v", "y", 5 * kHour, true)}),
                    make_post("early", "a", 10, {make_comment("c0", "u", "y", 0.5 * kHour, true)}),
                    timed_post("q", "b", 20, 4, kHour)});
    const auto ds = build_task1(c, 3.0, 1);
    REQUIRE(ds.instances.size() == 2);
    CHECK(ds.instances[0].post == 0);
    CHECK(ds.instances[0].k == 2);
    CHECK(ds.instances[0].label == 1);
    CHECK(ds.instances[1].post == 2);
    CHECK(ds.instances[1].k == 2);
    CHECK(ds.instances[1].label == 0);
    CHECK(ds.discarded == 1);
    CHECK(ds.pairs.size() == 1);

    // The only hostile post of this corpus turns hostile in its first hour.
    const Corpus early({make_post("e", "a", 0, {make_comment("c0", "u", "y", 0.5 * kHour, true)}),
                        timed_post("q", "b", 20, 4, kHour)});
    CHECK_THROWS_AS(build_task1(early, 1.0, 1), DataError);
    CHECK_THROWS_AS(build_task1(Corpus({timed_post("q", "b", 20, 4, kHour)}), 1.0, 1), DataError);
}

TEST_CASE("build_task1 on the synthetic corpus")
{
    SynthConfig cfg;
    cfg.n_posts = 400;
    const auto synth = generate_synthetic(cfg);
    for (double lead : {1.0, 5.0}) {
        const auto ds = build_task1(synth.corpus, lead, 2);
        std::map<std::size_t, int> hist;
        std::size_t pos = 0;
        for (const auto& inst : ds.instances) {
            hist[inst.k] += inst.label ? 1 : -1;
            pos += static_cast<std::size_t>(inst.label);
            const auto& post = synth.corpus.post(inst.post);
            CHECK(inst.k >= 1);
            for (std::size_t i = 0; i < inst.k; ++i) {
                CHECK_FALSE(post.comments[i].hostile);
            }
            if (inst.label == 1) {
                CHECK(post.comments[*post.first_hostile()].t - post.comments[inst.k - 1].t >= lead * kHour);
            } else {
                CHECK_FALSE(post.first_hostile().has_value());
            }
        }
        CHECK(2 * pos == ds.instances.size());
        for (const auto& [k, balance] : hist) {
            CHECK(balance == 0);
        }
    }
}

TEST_CASE("build_task2 rules")
{
    const Corpus c({timed_post("twelve", "a", 0, 15, 60, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}),
                    timed_post("one", "a", 10, 5, 60, {3}),
                    timed_post("five", "b", 20, 8, 60, {0, 2, 4, 5, 6}), timed_post("quiet", "c", 30, 4, 60)});
    const auto ds = build_task2(c, 10);
    REQUIRE(ds.instances.size() == 2);
    CHECK(ds.instances[0].post == 0);
    CHECK(ds.instances[0].label == 1);
    CHECK(ds.instances[0].k == 2);
    CHECK(ds.instances[1].post == 1);
    CHECK(ds.instances[1].label == 0);
    CHECK(ds.instances[1].k == 4);
    CHECK(ds.excluded == 1);
    CHECK_THROWS_AS(build_task2(c, 13), DataError);
    CHECK_THROWS_AS(build_task2(c, 1), ConfigError);
    CHECK_THROWS_AS(build_task2(Corpus({timed_post("x", "a", 0, 5, 60, {0, 1})}), 2), DataError);
}

TEST_CASE("label permutation swaps within pairs")
{
    const Bench b(planted_corpus(1));
    const auto ds = build_task1(b.corpus, 1.0, 1);
    const auto perm = permute_labels(ds, 3);
    std::size_t swapped = 0;
    for (auto [p, n] : ds.pairs) {
        CHECK(perm.instances[p].label + perm.instances[n].label == 1);
        swapped += static_cast<std::size_t>(perm.instances[p].label == 0);
    }
    CHECK(swapped > 0);
    CHECK(swapped < ds.pairs.size());
    CHECK(permute_labels(ds, 3).instances.size() == perm.instances.size());
}

TEST_CASE("planted marker is found by unigrams")
{
    Bench b(planted_corpus(1));
    const auto ds = build_task1(b.corpus, 1.0, 1);
    const std::vector<GroupSet> sets = {GroupSet{Group::U}, GroupSet{Group::U}, GroupSet{Group::User}};
    const auto run = run_ablation(b.cache, ds, sets, small_options());
    REQUIRE(run.results.size() == 3);
    CHECK(run.results[0].auc.mean >= 0.9);
    CHECK(run.audit.violations == 0);
    CHECK(run.audit.predictions == 3 * ds.instances.size());

    // Duplicate rows give identical metrics.
    CHECK(run.results[0].scores == run.results[1].scores);
    CHECK(run.results[0].auc.mean == run.results[1].auc.mean);

    for (const auto& r : run.results) {
        REQUIRE(r.folds.size() == 5);
        double sum = 0.0;
        for (const auto& f : r.folds) {
            sum += f.auc;
        }
        CHECK(std::abs(sum / 5.0 - r.auc.mean) < 1e-9);
    }

    const auto again = run_ablation(b.cache, ds, sets, small_options());
    CHECK(again.results[2].scores == run.results[2].scores);
}

TEST_CASE("sweeps agree with single runs")
{
    Bench b(planted_corpus(2));
    const std::vector<GroupSet> sets = {GroupSet{Group::U, Group::Lex}};
    const auto opt = small_options();
    const std::vector<double> leads = {3.0};
    const auto sweep = sweep_lead_time(b.cache, leads, sets, opt);
    const auto single = run_ablation(b.cache, build_task1(b.corpus, 3.0, opt.seed), sets, opt);
    REQUIRE(sweep.size() == 1);
    CHECK(sweep[0].results[0].scores == single.results[0].scores);
    CHECK_THROWS_AS(sweep_lead_time(b.cache, std::vector<double>{}, sets, opt), ConfigError);
    CHECK_THROWS_AS(sweep_intensity(b.cache, std::vector<int>{}, sets, opt), ConfigError);

    // Embedding groups without tables are a configuration error.
    const std::vector<GroupSet> w2v = {GroupSet{Group::W2v}};
    CHECK_THROWS_AS(run_ablation(b.cache, build_task1(b.corpus, 3.0, 1), w2v, opt), ConfigError);
}

TEST_CASE("stratification buckets")
{
    CHECK(bucket_label({1, 1}) == "1");
    CHECK(bucket_label({7, 9}) == "7-9");
    CHECK(bucket_label({10, 0}) == "10+");

    ExperimentRun run;
    run.results.resize(1);
    for (std::size_t k : {1, 9, 10, 10, 9, 2}) {
        run.dataset.instances.push_back({0, k, static_cast<int>(run.dataset.instances.size() % 2)});
        run.results[0].scores.push_back(static_cast<double>(run.dataset.instances.size()));
    }
    const auto buckets = default_buckets();
    const auto s = stratify(run, 0, buckets);
    REQUIRE(s.size() == 5);
    CHECK(s[0].count == 1);
    CHECK_FALSE(s[0].auc.has_value());
    CHECK(s[1].count == 1);
    CHECK(s[3].count == 2);
    CHECK(s[4].count == 2);
    CHECK(s[4].auc.has_value());

    ExperimentRun ones;
    ones.results.resize(1);
    for (int i = 0; i < 4; ++i) {
        ones.dataset.instances.push_back({0, 1, i % 2});
        ones.results[0].scores.push_back(i);
    }
    std::size_t populated = 0;
    for (const auto& st : stratify(ones, 0, buckets)) {
        populated += st.count > 0 ? 1 : 0;
    }
    CHECK(populated == 1);
}

TEST_CASE("named feature sets")
{
    CHECK(named_feature_set("full") == GroupSet::all());
    auto best1 = GroupSet::all();
    best1.erase(Group::W2v);
    best1.erase(Group::PrevCom);
    CHECK(named_feature_set("best1") == best1);
    CHECK(named_feature_set("best2") == (GroupSet{Group::Trend, Group::User, Group::FinalCom}));
    CHECK(named_feature_set("U+lex") == (GroupSet{Group::U, Group::Lex}));
    CHECK_THROWS_AS(named_feature_set("nonsense"), ConfigError);
}
