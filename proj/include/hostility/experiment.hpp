#pragma once

#include "hostility/corpus.hpp"
#include "hostility/embed.hpp"
#include "hostility/eval.hpp"
#include "hostility/features.hpp"
#include "hostility/linmodel.hpp"
#include "hostility/text.hpp"
#include "hostility/trend.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hostility {

enum class Task { Presence, Intensity };

std::string task_name(Task task);

struct TaskInstance {
    std::size_t post = 0;
    std::size_t k = 0; ///< observed comments
    int label = 0;
};

struct TaskDataset {
    Task task = Task::Presence;
    double param = 0.0; ///< lead hours or N
    std::vector<TaskInstance> instances;
    std::vector<std::pair<std::size_t, std::size_t>> pairs; ///< (positive, negative) instance indices
    std::size_t discarded = 0; ///< positives with nothing observable
    std::size_t unmatched = 0; ///< positives left without a negative
    std::size_t excluded = 0;  ///< intensity posts between the classes
};

/// Presence task: each hostile post is observed through its comments at
/// least `lead_hours` before its first hostile one and paired with a
/// non-hostile post truncated to the same count. Throws DataError when no
/// positive survives.
TaskDataset build_task1(const Corpus& corpus, double lead_hours, std::uint64_t seed);

/// Intensity task: hostile posts observed through their first hostile
/// comment; positive when the post collects at least n hostile comments,
/// negative when it has exactly one. Throws DataError when a class is empty.
TaskDataset build_task2(const Corpus& corpus, int n_threshold);

/// Label-permuted copy: paired labels are swapped by a fair coin, unpaired
/// labels shuffled.
TaskDataset permute_labels(const TaskDataset& dataset, std::uint64_t seed);

struct ExperimentResources {
    const Corpus* corpus = nullptr;
    const TokenizedCorpus* tokens = nullptr;
    const Lexicons* lexicons = nullptr;
    const EmbeddingTable* words = nullptr;    ///< needed by w2v
    const EmbeddingTable* subwords = nullptr; ///< needed by n-w2v, composite groups and trend
};

struct ExperimentOptions {
    int folds = 10;
    std::uint64_t seed = 1;
    TrainOptions train;
    std::size_t min_count = 2;
    double trend_threshold = 0.3;
    CommentModelOptions comment;
};

struct FoldMetrics {
    int fold = 0;
    double auc = 0.0;
    Prf1 prf;
};

struct MetricSummary {
    double mean = 0.0;
    double se = 0.0;
};

struct FeatureSetResult {
    GroupSet groups;
    std::string name;
    std::vector<FoldMetrics> folds;
    MetricSummary auc, f1, precision, recall;
    std::vector<double> scores; ///< out-of-fold score per instance
};

/// Counts from the leakage audit of one run.
struct AuditCounts {
    std::size_t predictions = 0;          ///< out-of-fold instance predictions checked
    std::size_t violations = 0;           ///< ... scored by a model trained on their own post
    std::size_t posterior_models = 0;     ///< comment models trained
    std::size_t posterior_violations = 0; ///< posteriors produced by a model that saw the post or its outer fold
};

struct ExperimentRun {
    TaskDataset dataset;
    FoldPlan plan;
    std::vector<FeatureSetResult> results;
    AuditCounts audit;
    double comment_auc = 0.5; ///< held-out comment-level AUC of the trend classifier
};

/// Caches per-(post, k) feature sources across runs on one corpus.
class FeatureCache {
public:
    explicit FeatureCache(const ExperimentResources& resources);
    ~FeatureCache();
    FeatureCache(const FeatureCache&) = delete;
    FeatureCache& operator=(const FeatureCache&) = delete;

    struct Entry {
        FeatureSources sources;
        DenseSources dense;
    };
    const Entry& get(std::size_t post, std::size_t k);
    const ExperimentResources& resources() const { return resources_; }
    int embed_dim() const;
    /// Groups the resources can serve.
    GroupSet available() const;

private:
    ExperimentResources resources_;
    std::unique_ptr<CachedLookup> words_;
    std::unique_ptr<CachedLookup> subwords_;
    std::map<std::pair<std::size_t, std::size_t>, Entry> entries_;
};

/// Cross-validated evaluation of every feature set on one dataset. Folds,
/// vocabulary (from training instances only), standardization and trend
/// posteriors are all fold-local.
ExperimentRun run_ablation(FeatureCache& cache, const TaskDataset& dataset, std::span<const GroupSet> feature_sets,
                           const ExperimentOptions& options);

/// One run per lead time. Throws ConfigError for an empty list.
std::vector<ExperimentRun> sweep_lead_time(FeatureCache& cache, std::span<const double> leads,
                                           std::span<const GroupSet> feature_sets, const ExperimentOptions& options,
                                           bool permute = false);

/// One run per intensity threshold. Throws ConfigError for an empty list.
std::vector<ExperimentRun> sweep_intensity(FeatureCache& cache, std::span<const int> thresholds,
                                           std::span<const GroupSet> feature_sets, const ExperimentOptions& options,
                                           bool permute = false);

/// Observed-comment buckets as inclusive [lo, hi]; hi = 0 means unbounded.
using Bucket = std::pair<std::size_t, std::size_t>;
std::vector<Bucket> default_buckets();
std::string bucket_label(const Bucket& b);

struct StratumResult {
    Bucket bucket;
    std::size_t count = 0;
    std::size_t positives = 0;
    std::optional<double> auc; ///< empty when the bucket holds a single class
};

/// AUC per bucket of pooled out-of-fold scores.
std::vector<StratumResult> stratify(const ExperimentRun& run, std::size_t result_index,
                                    std::span<const Bucket> buckets);

/// Named feature sets: "full", "best1", "best2", or a group list.
GroupSet named_feature_set(const std::string& name);

struct GreedyStep {
    GroupSet groups;
    double auc = 0.0;
};

/// Forward selection over `candidates`, adding the group with the highest
/// mean AUC until none improves it.
std::vector<GreedyStep> greedy_forward(FeatureCache& cache, const TaskDataset& dataset, const GroupSet& candidates,
                                       const ExperimentOptions& options);

struct FullModel {
    std::shared_ptr<const FeatureLayout> layout;
    Vocabulary vocab;
    LinearModel model;
};

/// Fits one model on the whole dataset. Trend posteriors come from
/// cross-validation over the dataset posts.
FullModel fit_full_model(FeatureCache& cache, const TaskDataset& dataset, const GroupSet& groups,
                         const ExperimentOptions& options);

} // namespace hostility
