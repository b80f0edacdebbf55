#include "hostility/experiment.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace hostility {

std::string task_name(Task task)
{
    return task == Task::Presence ? "task1" : "task2";
}

TaskDataset build_task1(const Corpus& corpus, double lead_hours, std::uint64_t seed)
{
    if (!(lead_hours >= 0)) {
        throw ConfigError("lead time must be non-negative");
    }
    TaskDataset ds;
    ds.task = Task::Presence;
    ds.param = lead_hours;

    std::vector<MatchRequest> requests;
    std::vector<std::size_t> pool;
    std::vector<std::size_t> pool_sizes;
    std::size_t hostile_posts = 0;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        const auto& post = corpus.post(p);
        const auto first = post.first_hostile();
        if (!first) {
            if (!post.comments.empty()) {
                pool.push_back(p);
                pool_sizes.push_back(post.comments.size());
            }
            continue;
        }
        ++hostile_posts;
        const double cutoff = post.comments[*first].t - lead_hours * 3600.0;
        std::size_t k = 0;
        while (k < *first && post.comments[k].t <= cutoff) {
            ++k;
        }
        if (k == 0) {
            ++ds.discarded;
            continue;
        }
        requests.push_back({p, k});
    }
    if (hostile_posts == 0) {
        throw DataError("corpus has no hostile posts");
    }
    if (requests.empty()) {
        throw DataError("no hostile post has an observable comment " + format_double(lead_hours) +
                        " hours before its first hostile comment");
    }
    if (pool.empty()) {
        throw DataError("corpus has no non-hostile posts to match against");
    }
    const auto matched = match_negatives(requests, pool, pool_sizes, seed);
    ds.unmatched = matched.dropped.size();
    if (matched.matches.empty()) {
        throw DataError("no hostile post could be matched with a non-hostile post");
    }
    for (const auto& m : matched.matches) {
        const auto& req = requests[m.positive];
        ds.pairs.emplace_back(ds.instances.size(), ds.instances.size() + 1);
        ds.instances.push_back({req.post, req.k, 1});
        ds.instances.push_back({m.negative_post, m.k, 0});
    }
    return ds;
}

TaskDataset build_task2(const Corpus& corpus, int n_threshold)
{
    if (n_threshold < 2) {
        throw ConfigError("intensity threshold must be >= 2");
    }
    TaskDataset ds;
    ds.task = Task::Intensity;
    ds.param = n_threshold;
    std::size_t positives = 0;
    for (std::size_t p = 0; p < corpus.size(); ++p) {
        const auto& post = corpus.post(p);
        const auto first = post.first_hostile();
        if (!first) {
            continue;
        }
        const auto total = post.hostile_count();
        if (total >= static_cast<std::size_t>(n_threshold)) {
            ds.instances.push_back({p, *first + 1, 1});
            ++positives;
        } else if (total == 1) {
            ds.instances.push_back({p, *first + 1, 0});
        } else {
            ++ds.excluded;
        }
    }
    if (positives == 0) {
        throw DataError("no post reaches " + std::to_string(n_threshold) + " hostile comments");
    }
    if (positives == ds.instances.size()) {
        throw DataError("no post has exactly one hostile comment");
    }
    return ds;
}

TaskDataset permute_labels(const TaskDataset& dataset, std::uint64_t seed)
{
    TaskDataset out = dataset;
    std::mt19937_64 rng(seed);
    std::vector<bool> paired(out.instances.size(), false);
    std::bernoulli_distribution coin(0.5);
    for (auto [a, b] : out.pairs) {
        paired[a] = paired[b] = true;
        if (coin(rng)) {
            std::swap(out.instances[a].label, out.instances[b].label);
        }
    }
    std::vector<std::size_t> loose;
    std::vector<int> labels;
    for (std::size_t i = 0; i < out.instances.size(); ++i) {
        if (!paired[i]) {
            loose.push_back(i);
            labels.push_back(out.instances[i].label);
        }
    }
    std::shuffle(labels.begin(), labels.end(), rng);
    for (std::size_t j = 0; j < loose.size(); ++j) {
        out.instances[loose[j]].label = labels[j];
    }
    return out;
}

FeatureCache::FeatureCache(const ExperimentResources& resources) : resources_(resources)
{
    if (!resources.corpus || !resources.tokens || !resources.lexicons) {
        throw ConfigError("experiment resources need a corpus, its tokens and lexicons");
    }
    if (resources.words) {
        words_ = std::make_unique<CachedLookup>(*resources.words);
    }
    if (resources.subwords) {
        subwords_ = std::make_unique<CachedLookup>(*resources.subwords);
    }
    if (resources.words && resources.subwords &&
        resources.words->dimension() != resources.subwords->dimension()) {
        throw ConfigError("word and subword tables differ in dimension");
    }
}

FeatureCache::~FeatureCache() = default;

int FeatureCache::embed_dim() const
{
    if (resources_.subwords) {
        return resources_.subwords->dimension();
    }
    return resources_.words ? resources_.words->dimension() : 100;
}

GroupSet FeatureCache::available() const
{
    GroupSet g = {Group::U, Group::Lex, Group::Trend, Group::User};
    if (resources_.words) {
        g.insert(Group::W2v);
    }
    if (resources_.subwords) {
        for (auto x : {Group::NW2v, Group::FinalCom, Group::PrevCom, Group::PrevPost}) {
            g.insert(x);
        }
    }
    return g;
}

const FeatureCache::Entry& FeatureCache::get(std::size_t post, std::size_t k)
{
    const auto key = std::make_pair(post, k);
    if (auto it = entries_.find(key); it != entries_.end()) {
        return it->second;
    }
    Entry e;
    e.sources = extract_sources(*resources_.corpus, *resources_.tokens, post, k);
    e.dense = compute_dense(e.sources, *resources_.lexicons, available(), {words_.get(), subwords_.get()},
                            embed_dim());
    return entries_.emplace(key, std::move(e)).first->second;
}

namespace {

MetricSummary summarize(const std::vector<FoldMetrics>& folds, double (*get)(const FoldMetrics&))
{
    std::vector<double> v;
    for (const auto& f : folds) {
        v.push_back(get(f));
    }
    return {mean(v), standard_error(v)};
}

void check_available(const FeatureCache& cache, std::span<const GroupSet> sets)
{
    const auto avail = cache.available();
    for (const auto& s : sets) {
        if (s.empty()) {
            throw ConfigError("empty feature set");
        }
        for (auto g : s.groups()) {
            if (!avail.contains(g)) {
                throw ConfigError("feature group " + std::string(group_name(g)) +
                                  " needs an embedding table that was not provided");
            }
        }
    }
}

Vocabulary fold_vocabulary(FeatureCache& cache, const TaskDataset& ds, std::span<const std::size_t> members,
                           std::size_t min_count)
{
    VocabularyCounter counter;
    for (auto i : members) {
        const auto& s = cache.get(ds.instances[i].post, ds.instances[i].k).sources;
        counter.add(s.observed);
        counter.add(s.final_comment);
        counter.add(s.prev_comments);
        counter.add(s.prev_post);
    }
    return counter.finish(min_count);
}

std::span<const double> observed_posteriors(const PosteriorMap* map, const TaskInstance& inst)
{
    if (!map) {
        return {};
    }
    const auto& p = map->at(inst.post).posterior;
    return std::span<const double>(p).first(inst.k);
}

} // namespace

ExperimentRun run_ablation(FeatureCache& cache, const TaskDataset& dataset, std::span<const GroupSet> feature_sets,
                           const ExperimentOptions& options)
{
    check_available(cache, feature_sets);
    const auto& res = cache.resources();
    ExperimentRun run;
    run.dataset = dataset;

    std::vector<int> labels;
    std::vector<std::size_t> posts;
    for (const auto& inst : dataset.instances) {
        labels.push_back(inst.label);
        posts.push_back(inst.post);
    }
    run.plan = make_folds(labels, options.folds, options.seed, dataset.pairs);

    const bool need_trend = std::any_of(feature_sets.begin(), feature_sets.end(),
                                        [](const GroupSet& s) { return s.contains(Group::Trend); });
    std::unique_ptr<CommentScorer> scorer;
    DoubleCvResult posteriors;
    if (need_trend) {
        scorer = std::make_unique<CommentScorer>(*res.corpus, *res.tokens, *res.lexicons, res.subwords,
                                                 options.comment);
        posteriors = score_comments_double_cv(*scorer, posts, run.plan.fold_of, options.folds);
        run.comment_auc = posteriors.test_auc;
        run.audit.posterior_models = scorer->registry().size();
        run.audit.posterior_violations = audit_provenance(posteriors, scorer->registry());
    }

    for (const auto& s : feature_sets) {
        FeatureSetResult r;
        r.groups = s;
        r.name = s.name();
        r.scores.assign(dataset.instances.size(), 0.0);
        run.results.push_back(std::move(r));
    }

    for (int f = 0; f < options.folds; ++f) {
        std::vector<std::size_t> train_idx;
        std::vector<std::size_t> test_idx;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            (run.plan.fold_of[i] == f ? test_idx : train_idx).push_back(i);
        }
        if (test_idx.empty()) {
            continue;
        }
        std::set<std::size_t> train_posts;
        std::vector<int> y_train;
        std::vector<int> y_test;
        for (auto i : train_idx) {
            train_posts.insert(posts[i]);
            y_train.push_back(labels[i]);
        }
        for (auto i : test_idx) {
            y_test.push_back(labels[i]);
        }
        const Vocabulary vocab = fold_vocabulary(cache, dataset, train_idx, options.min_count);
        const PosteriorMap* fold_posteriors = need_trend ? &posteriors.by_fold[static_cast<std::size_t>(f)] : nullptr;

        for (std::size_t si = 0; si < feature_sets.size(); ++si) {
            const auto& groups = feature_sets[si];
            auto layout = std::make_shared<const FeatureLayout>(groups, vocab, cache.embed_dim());
            auto rows = [&](const std::vector<std::size_t>& idx) {
                std::vector<FeatureVector> out;
                out.reserve(idx.size());
                for (auto i : idx) {
                    const auto& inst = dataset.instances[i];
                    const auto& e = cache.get(inst.post, inst.k);
                    out.push_back(assemble(layout, e.sources, e.dense, vocab,
                                           groups.contains(Group::Trend) ? observed_posteriors(fold_posteriors, inst)
                                                                         : std::span<const double>{},
                                           options.trend_threshold));
                }
                return stack_rows(out);
            };
            const LinearModel model =
                train(rows(train_idx), y_train, ModelSchema::from_layout(*layout), options.train);
            const Eigen::VectorXd p = predict_proba(model, rows(test_idx), layout->fingerprint());

            auto& result = run.results[si];
            std::vector<double> scores(p.data(), p.data() + p.size());
            for (std::size_t j = 0; j < test_idx.size(); ++j) {
                result.scores[test_idx[j]] = scores[j];
                ++run.audit.predictions;
                run.audit.violations += train_posts.count(posts[test_idx[j]]);
            }
            FoldMetrics m;
            m.fold = f;
            try {
                m.auc = auc(scores, y_test);
            } catch (const DataError&) {
                throw DataError("fold " + std::to_string(f) + " of " + task_name(dataset.task) +
                                " holds a single class; use fewer folds");
            }
            m.prf = prf1(scores, y_test);
            result.folds.push_back(m);
        }
    }

    for (auto& r : run.results) {
        r.auc = summarize(r.folds, [](const FoldMetrics& m) { return m.auc; });
        r.f1 = summarize(r.folds, [](const FoldMetrics& m) { return m.prf.f1; });
        r.precision = summarize(r.folds, [](const FoldMetrics& m) { return m.prf.precision; });
        r.recall = summarize(r.folds, [](const FoldMetrics& m) { return m.prf.recall; });
    }
    return run;
}

std::vector<ExperimentRun> sweep_lead_time(FeatureCache& cache, std::span<const double> leads,
                                           std::span<const GroupSet> feature_sets, const ExperimentOptions& options,
                                           bool permute)
{
    if (leads.empty()) {
        throw ConfigError("lead-time sweep needs at least one lead time");
    }
    std::vector<ExperimentRun> runs;
    for (double lead : leads) {
        auto ds = build_task1(*cache.resources().corpus, lead, options.seed);
        if (permute) {
            ds = permute_labels(ds, options.seed + 1);
        }
        runs.push_back(run_ablation(cache, ds, feature_sets, options));
    }
    return runs;
}

std::vector<ExperimentRun> sweep_intensity(FeatureCache& cache, std::span<const int> thresholds,
                                           std::span<const GroupSet> feature_sets, const ExperimentOptions& options,
                                           bool permute)
{
    if (thresholds.empty()) {
        throw ConfigError("intensity sweep needs at least one threshold");
    }
    std::vector<ExperimentRun> runs;
    for (int n : thresholds) {
        auto ds = build_task2(*cache.resources().corpus, n);
        if (permute) {
            ds = permute_labels(ds, options.seed + 1);
        }
        runs.push_back(run_ablation(cache, ds, feature_sets, options));
    }
    return runs;
}

std::vector<Bucket> default_buckets()
{
    return {{1, 1}, {2, 3}, {4, 6}, {7, 9}, {10, 0}};
}

std::string bucket_label(const Bucket& b)
{
    if (b.second == 0) {
        return std::to_string(b.first) + "+";
    }
    if (b.first == b.second) {
        return std::to_string(b.first);
    }
    return std::to_string(b.first) + "-" + std::to_string(b.second);
}

std::vector<StratumResult> stratify(const ExperimentRun& run, std::size_t result_index,
                                    std::span<const Bucket> buckets)
{
    const auto& result = run.results.at(result_index);
    std::vector<StratumResult> out;
    for (const auto& b : buckets) {
        StratumResult s;
        s.bucket = b;
        std::vector<double> scores;
        std::vector<int> labels;
        for (std::size_t i = 0; i < run.dataset.instances.size(); ++i) {
            const auto k = run.dataset.instances[i].k;
            if (k >= b.first && (b.second == 0 || k <= b.second)) {
                scores.push_back(result.scores[i]);
                labels.push_back(run.dataset.instances[i].label);
            }
        }
        s.count = labels.size();
        s.positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
        if (s.positives > 0 && s.positives < s.count) {
            s.auc = auc(scores, labels);
        }
        out.push_back(s);
    }
    return out;
}

GroupSet named_feature_set(const std::string& name)
{
    if (name == "full") {
        return GroupSet::all();
    }
    if (name == "best1") {
        auto g = GroupSet::all();
        g.erase(Group::W2v);
        g.erase(Group::PrevCom);
        return g;
    }
    if (name == "best2") {
        return {Group::Trend, Group::User, Group::FinalCom};
    }
    return GroupSet::parse(name);
}

std::vector<GreedyStep> greedy_forward(FeatureCache& cache, const TaskDataset& dataset, const GroupSet& candidates,
                                       const ExperimentOptions& options)
{
    std::vector<GreedyStep> steps;
    GroupSet current;
    double current_auc = 0.5;
    for (;;) {
        std::vector<GroupSet> trials;
        for (auto g : candidates.groups()) {
            if (!current.contains(g)) {
                auto t = current;
                t.insert(g);
                trials.push_back(t);
            }
        }
        if (trials.empty()) {
            break;
        }
        const auto run = run_ablation(cache, dataset, trials, options);
        std::size_t best = 0;
        for (std::size_t i = 1; i < run.results.size(); ++i) {
            if (run.results[i].auc.mean > run.results[best].auc.mean) {
                best = i;
            }
        }
        if (!(run.results[best].auc.mean > current_auc)) {
            break;
        }
        current = trials[best];
        current_auc = run.results[best].auc.mean;
        steps.push_back({current, current_auc});
    }
    return steps;
}

FullModel fit_full_model(FeatureCache& cache, const TaskDataset& dataset, const GroupSet& groups,
                         const ExperimentOptions& options)
{
    const GroupSet sets[] = {groups};
    check_available(cache, sets);
    const auto& res = cache.resources();
    std::vector<std::size_t> all(dataset.instances.size());
    std::vector<std::size_t> posts;
    std::vector<int> labels;
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
        posts.push_back(dataset.instances[i].post);
        labels.push_back(dataset.instances[i].label);
    }
    std::unique_ptr<CommentScorer> scorer;
    PosteriorMap posteriors;
    if (groups.contains(Group::Trend)) {
        scorer = std::make_unique<CommentScorer>(*res.corpus, *res.tokens, *res.lexicons, res.subwords,
                                                 options.comment);
        posteriors = score_comments_cv(*scorer, posts, options.comment.inner_folds);
    }

    FullModel full;
    full.vocab = fold_vocabulary(cache, dataset, all, options.min_count);
    full.layout = std::make_shared<const FeatureLayout>(groups, full.vocab, cache.embed_dim());
    std::vector<FeatureVector> rows;
    for (const auto& inst : dataset.instances) {
        const auto& e = cache.get(inst.post, inst.k);
        rows.push_back(assemble(full.layout, e.sources, e.dense, full.vocab,
                                scorer ? observed_posteriors(&posteriors, inst) : std::span<const double>{},
                                options.trend_threshold));
    }
    full.model = train(stack_rows(rows), labels, ModelSchema::from_layout(*full.layout), options.train);
    return full;
}

} // namespace hostility
