#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hostility {

/// Area under the ROC curve as the rank statistic
/// (concordant + 0.5 * tied) / (P * N). Throws DataError for single-class input.
double auc(std::span<const double> scores, std::span<const int> labels);

struct Prf1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Precision, recall and F1 at `score >= threshold`. Empty denominators give 0.
Prf1 prf1(std::span<const double> scores, std::span<const int> labels, double threshold = 0.5);

/// Fold assignment over instances. Paired instances always share a fold.
struct FoldPlan {
    int k = 10;
    std::uint64_t seed = 0;
    std::vector<int> fold_of; ///< per instance
    std::vector<std::pair<std::size_t, std::size_t>> pairs;

    std::vector<std::size_t> members(int fold) const;
};

/// Label-stratified, pair-preserving partition into k folds. Pairs are
/// dealt as units; unpaired instances are dealt per label. When a stratum
/// has fewer than k units some folds get none of it.
FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed,
                    std::span<const std::pair<std::size_t, std::size_t>> pairs = {});

struct MatchRequest {
    std::size_t post = 0;
    std::size_t k = 0; ///< observed comment count of the positive
};

struct Match {
    std::size_t positive = 0; ///< index into the request list
    std::size_t negative_post = 0;
    std::size_t k = 0;
};

struct MatchResult {
    std::vector<Match> matches;
    std::vector<std::size_t> dropped; ///< request indices left unmatched
};

/// Draws, without replacement, one pool post with at least k comments for
/// each request. `pool_sizes[i]` is the comment count of `pool[i]`.
/// Requests are served from the most demanding k downward.
MatchResult match_negatives(std::span<const MatchRequest> positives, std::span<const std::size_t> pool,
                            std::span<const std::size_t> pool_sizes, std::uint64_t seed);

double mean(std::span<const double> values);
/// Sample standard deviation over sqrt(n).
double standard_error(std::span<const double> values);

} // namespace hostility
