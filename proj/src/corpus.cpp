#include "hostility/corpus.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

namespace hostility {

bool Post::hostile() const
{
    return std::any_of(comments.begin(), comments.end(), [](const Comment& c) { return c.hostile; });
}

std::size_t Post::hostile_count() const
{
    return static_cast<std::size_t>(
        std::count_if(comments.begin(), comments.end(), [](const Comment& c) { return c.hostile; }));
}

std::optional<std::size_t> Post::first_hostile() const
{
    for (std::size_t i = 0; i < comments.size(); ++i) {
        if (comments[i].hostile) {
            return i;
        }
    }
    return std::nullopt;
}

Corpus::Corpus(std::vector<Post> posts) : posts_(std::move(posts))
{
    for (std::size_t p = 0; p < posts_.size(); ++p) {
        auto& post = posts_[p];
        if (!by_id_.emplace(post.id, p).second) {
            throw DataError("duplicate post id '" + post.id + "'");
        }
        std::unordered_set<std::string> seen;
        for (const auto& c : post.comments) {
            if (!(c.t >= 0.0)) {
                throw DataError("post '" + post.id + "' comment '" + c.id + "' has negative timestamp");
            }
            if (!seen.insert(c.id).second) {
                throw DataError("post '" + post.id + "' has duplicate comment id '" + c.id + "'");
            }
        }
        std::sort(post.comments.begin(), post.comments.end(), [](const Comment& a, const Comment& b) {
            return a.t != b.t ? a.t < b.t : a.id < b.id;
        });
        by_author_[post.author].push_back(p);
        for (std::size_t c = 0; c < post.comments.size(); ++c) {
            by_user_[post.comments[c].author].push_back({p, c, post.created_at + post.comments[c].t});
        }
    }
    for (auto& [author, list] : by_author_) {
        std::sort(list.begin(), list.end(), [this](std::size_t a, std::size_t b) {
            const auto& pa = posts_[a];
            const auto& pb = posts_[b];
            return pa.created_at != pb.created_at ? pa.created_at < pb.created_at : pa.id < pb.id;
        });
    }
    for (auto& [user, list] : by_user_) {
        std::sort(list.begin(), list.end(), [this](const CommentRef& a, const CommentRef& b) {
            if (a.abs_time != b.abs_time) {
                return a.abs_time < b.abs_time;
            }
            if (a.post != b.post) {
                return posts_[a.post].id < posts_[b.post].id;
            }
            return a.comment < b.comment;
        });
    }
}

std::size_t Corpus::comment_count() const
{
    std::size_t n = 0;
    for (const auto& p : posts_) {
        n += p.comments.size();
    }
    return n;
}

std::optional<std::size_t> Corpus::find(std::string_view post_id) const
{
    auto it = by_id_.find(std::string(post_id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::span<const std::size_t> Corpus::posts_by_author(const std::string& author) const
{
    auto it = by_author_.find(author);
    if (it == by_author_.end()) {
        return {};
    }
    return it->second;
}

std::span<const CommentRef> Corpus::comments_by_user(const std::string& user) const
{
    auto it = by_user_.find(user);
    if (it == by_user_.end()) {
        return {};
    }
    return it->second;
}

std::optional<std::size_t> Corpus::previous_post(std::size_t post_index) const
{
    const auto& target = posts_.at(post_index);
    std::optional<std::size_t> best;
    for (std::size_t p : posts_by_author(target.author)) {
        if (posts_[p].created_at < target.created_at) {
            best = p; // list is ordered, so the last qualifying entry is the most recent
        } else {
            break;
        }
    }
    return best;
}

std::optional<CommentRef> Corpus::latest_comment_before(const std::string& user, double before,
                                                        std::size_t exclude_post) const
{
    auto list = comments_by_user(user);
    auto end = std::lower_bound(list.begin(), list.end(), before,
                                [](const CommentRef& r, double t) { return r.abs_time < t; });
    for (auto it = end; it != list.begin();) {
        --it;
        if (it->post != exclude_post) {
            return *it;
        }
    }
    return std::nullopt;
}

double Corpus::absolute_time(std::size_t post, std::size_t comment) const
{
    const auto& p = posts_.at(post);
    return p.created_at + p.comments.at(comment).t;
}

namespace {

Post post_from_json(const nlohmann::json& j)
{
    Post post;
    post.id = j.at("id").get<std::string>();
    post.author = j.at("author").get<std::string>();
    post.created_at = j.at("created_at").get<double>();
    for (const auto& jc : j.at("comments")) {
        Comment c;
        c.id = jc.at("id").get<std::string>();
        c.author = jc.at("author").get<std::string>();
        c.text = jc.at("text").get<std::string>();
        c.t = jc.at("t").get<double>();
        c.hostile = jc.at("hostile").get<bool>();
        if (!(c.t >= 0.0)) {
            throw DataError("comment '" + c.id + "' has negative timestamp");
        }
        post.comments.push_back(std::move(c));
    }
    return post;
}

nlohmann::json post_to_json(const Post& post)
{
    nlohmann::json comments = nlohmann::json::array();
    for (const auto& c : post.comments) {
        comments.push_back({{"id", c.id}, {"author", c.author}, {"text", c.text}, {"t", c.t}, {"hostile", c.hostile}});
    }
    return {{"id", post.id}, {"author", post.author}, {"created_at", post.created_at}, {"comments", comments}};
}

} // namespace

Corpus read_corpus(std::istream& in)
{
    std::vector<Post> posts;
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            auto post = post_from_json(nlohmann::json::parse(line));
            if (!ids.insert(post.id).second) {
                throw DataError("duplicate post id '" + post.id + "'");
            }
            posts.push_back(std::move(post));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return Corpus(std::move(posts));
}

Corpus load_corpus(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open corpus " + path.string());
    }
    return read_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out)
{
    for (const auto& post : corpus.posts()) {
        out << post_to_json(post).dump() << '\n';
    }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path)
{
    std::ostringstream ss;
    write_corpus(corpus, ss);
    write_file_atomic(path, ss.str());
}

} // namespace hostility
