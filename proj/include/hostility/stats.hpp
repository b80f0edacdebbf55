#pragma once

#include "hostility/corpus.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace hostility {

/// Descending rank-ordered distributions over posts.
struct StatsReport {
    std::vector<double> comments_per_post;
    std::vector<double> hostile_per_post;
    std::vector<double> duration_days;       ///< time of the last comment
    std::vector<double> first_hostile_hours; ///< hostile posts only
    std::vector<double> unique_users;

    std::size_t hostile_posts = 0;
    std::size_t hostile_post_comments = 0;
    std::size_t quiet_posts = 0;
    std::size_t quiet_post_comments = 0;
    std::size_t hostile_comments = 0;
};

/// Throws DataError for an empty corpus.
StatsReport corpus_stats(const Corpus& corpus);

/// One `rank,value` CSV per statistic plus table1.csv
/// (`row,posts,comments,hostile_comments`).
void write_stats(const StatsReport& report, const std::filesystem::path& dir);

} // namespace hostility
