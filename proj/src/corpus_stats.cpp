#include "hostility/stats.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace hostility {

StatsReport corpus_stats(const Corpus& corpus)
{
    if (corpus.empty()) {
        throw DataError("cannot summarize an empty corpus");
    }
    StatsReport r;
    for (const auto& post : corpus.posts()) {
        const auto n = post.comments.size();
        const auto hostile = post.hostile_count();
        r.comments_per_post.push_back(static_cast<double>(n));
        r.hostile_per_post.push_back(static_cast<double>(hostile));
        r.duration_days.push_back(n ? post.comments.back().t / 86400.0 : 0.0);
        std::set<std::string> authors;
        for (const auto& c : post.comments) {
            authors.insert(c.author);
        }
        r.unique_users.push_back(static_cast<double>(authors.size()));
        if (auto first = post.first_hostile()) {
            r.first_hostile_hours.push_back(post.comments[*first].t / 3600.0);
            ++r.hostile_posts;
            r.hostile_post_comments += n;
        } else {
            ++r.quiet_posts;
            r.quiet_post_comments += n;
        }
        r.hostile_comments += hostile;
    }
    for (auto* series : {&r.comments_per_post, &r.hostile_per_post, &r.duration_days, &r.first_hostile_hours,
                         &r.unique_users}) {
        std::sort(series->begin(), series->end(), std::greater<>());
    }
    return r;
}

namespace {

std::string ranked(const std::vector<double>& values)
{
    std::ostringstream out;
    out << "rank,value\n";
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << i + 1 << ',' << format_double(values[i]) << '\n';
    }
    return out.str();
}

} // namespace

void write_stats(const StatsReport& r, const std::filesystem::path& dir)
{
    write_file_atomic(dir / "comments_per_post.csv", ranked(r.comments_per_post));
    write_file_atomic(dir / "hostile_per_post.csv", ranked(r.hostile_per_post));
    write_file_atomic(dir / "duration_days.csv", ranked(r.duration_days));
    write_file_atomic(dir / "first_hostile_hours.csv", ranked(r.first_hostile_hours));
    write_file_atomic(dir / "unique_users.csv", ranked(r.unique_users));

    std::ostringstream t;
    t << "row,posts,comments,hostile_comments\n";
    t << "hostile posts," << r.hostile_posts << ',' << r.hostile_post_comments << ',' << r.hostile_comments << '\n';
    t << "non-hostile posts," << r.quiet_posts << ',' << r.quiet_post_comments << ",0\n";
    t << "total," << r.hostile_posts + r.quiet_posts << ',' << r.hostile_post_comments + r.quiet_post_comments << ','
      << r.hostile_comments << '\n';
    write_file_atomic(dir / "table1.csv", t.str());
}

} // namespace hostility
