#include "hostility/eval.hpp"

#include "hostility/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace hostility {

double auc(std::span<const double> scores, std::span<const int> labels)
{
    if (scores.size() != labels.size()) {
        throw ConfigError("auc: scores and labels differ in length");
    }
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Mann-Whitney: sum of positive mid-ranks.
    double rank_sum = 0.0;
    std::size_t positives = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const double mid_rank = 0.5 * static_cast<double>(i + 1 + j); // ranks i+1..j
        for (std::size_t m = i; m < j; ++m) {
            if (labels[order[m]]) {
                rank_sum += mid_rank;
                ++positives;
            }
        }
        i = j;
    }
    const std::size_t negatives = scores.size() - positives;
    if (positives == 0 || negatives == 0) {
        throw DataError("auc needs both classes");
    }
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

Prf1 prf1(std::span<const double> scores, std::span<const int> labels, double threshold)
{
    if (scores.size() != labels.size()) {
        throw ConfigError("prf1: scores and labels differ in length");
    }
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool predicted = scores[i] >= threshold;
        if (predicted && labels[i]) ++tp;
        else if (predicted) ++fp;
        else if (labels[i]) ++fn;
    }
    Prf1 r;
    r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

std::vector<std::size_t> FoldPlan::members(int fold) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == fold) {
            out.push_back(i);
        }
    }
    return out;
}

FoldPlan make_folds(std::span<const int> labels, int k, std::uint64_t seed,
                    std::span<const std::pair<std::size_t, std::size_t>> pairs)
{
    if (k < 2) {
        throw ConfigError("fold count must be >= 2");
    }
    if (labels.size() < static_cast<std::size_t>(k)) {
        throw DataError("need at least " + std::to_string(k) + " instances for " + std::to_string(k) + " folds");
    }
    FoldPlan plan;
    plan.k = k;
    plan.seed = seed;
    plan.pairs.assign(pairs.begin(), pairs.end());
    plan.fold_of.assign(labels.size(), -1);

    // Units: pairs first, then singletons split by label.
    std::vector<std::vector<std::size_t>> paired_units;
    std::vector<bool> in_pair(labels.size(), false);
    for (auto [a, b] : pairs) {
        if (a >= labels.size() || b >= labels.size() || in_pair[a] || in_pair[b]) {
            throw ConfigError("invalid or overlapping instance pairs");
        }
        in_pair[a] = in_pair[b] = true;
        paired_units.push_back({a, b});
    }
    std::vector<std::vector<std::size_t>> positive_units;
    std::vector<std::vector<std::size_t>> negative_units;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!in_pair[i]) {
            (labels[i] ? positive_units : negative_units).push_back({i});
        }
    }

    std::mt19937_64 rng(seed);
    int next = 0;
    for (auto* units : {&paired_units, &positive_units, &negative_units}) {
        std::shuffle(units->begin(), units->end(), rng);
        for (const auto& unit : *units) {
            for (auto i : unit) {
                plan.fold_of[i] = next;
            }
            next = (next + 1) % k;
        }
    }
    return plan;
}

MatchResult match_negatives(std::span<const MatchRequest> positives, std::span<const std::size_t> pool,
                            std::span<const std::size_t> pool_sizes, std::uint64_t seed)
{
    if (pool.empty()) {
        throw DataError("negative pool is empty");
    }
    if (pool.size() != pool_sizes.size()) {
        throw ConfigError("pool and pool_sizes differ in length");
    }
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> order(positives.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return positives[a].k > positives[b].k; });

    std::vector<bool> used(pool.size(), false);
    MatchResult result;
    std::vector<std::size_t> eligible;
    for (auto r : order) {
        eligible.clear();
        for (std::size_t i = 0; i < pool.size(); ++i) {
            if (!used[i] && pool_sizes[i] >= positives[r].k) {
                eligible.push_back(i);
            }
        }
        if (eligible.empty()) {
            result.dropped.push_back(r);
            continue;
        }
        std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
        const auto chosen = eligible[pick(rng)];
        used[chosen] = true;
        result.matches.push_back({r, pool[chosen], positives[r].k});
    }
    std::sort(result.matches.begin(), result.matches.end(),
              [](const Match& a, const Match& b) { return a.positive < b.positive; });
    std::sort(result.dropped.begin(), result.dropped.end());
    return result;
}

double mean(std::span<const double> values)
{
    if (values.empty()) {
        return 0.0;
    }
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values)
{
    if (values.size() < 2) {
        return 0.0;
    }
    const double m = mean(values);
    double ss = 0.0;
    for (double v : values) {
        ss += (v - m) * (v - m);
    }
    const double n = static_cast<double>(values.size());
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

} // namespace hostility
