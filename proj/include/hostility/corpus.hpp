#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace hostility {

struct Comment {
    std::string id;
    std::string author;
    std::string text;
    double t = 0.0; ///< seconds since the parent post was created
    bool hostile = false;

    bool operator==(const Comment&) const = default;
};

struct Post {
    std::string id;
    std::string author;
    double created_at = 0.0; ///< absolute epoch seconds
    std::vector<Comment> comments; ///< ordered by (t, id)

    bool hostile() const;
    std::size_t hostile_count() const;
    /// Index of the first hostile comment, if any.
    std::optional<std::size_t> first_hostile() const;

    bool operator==(const Post&) const = default;
};

/// Location of one comment inside a corpus, with its absolute timestamp.
struct CommentRef {
    std::size_t post = 0;
    std::size_t comment = 0;
    double abs_time = 0.0;
};

/// Immutable collection of posts with author and commenter indices.
///
/// Construction validates the posts (non-negative comment times, unique post
/// ids, unique comment ids within a post) and sorts every comment list by
/// (t, id) so the ordering is total.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Post> posts);

    const std::vector<Post>& posts() const { return posts_; }
    const Post& post(std::size_t i) const { return posts_.at(i); }
    std::size_t size() const { return posts_.size(); }
    bool empty() const { return posts_.empty(); }
    std::size_t comment_count() const;

    std::optional<std::size_t> find(std::string_view post_id) const;

    /// Posts by `author`, ordered by (created_at, id).
    std::span<const std::size_t> posts_by_author(const std::string& author) const;
    /// Comments written by `user` anywhere in the corpus, ordered by absolute time.
    std::span<const CommentRef> comments_by_user(const std::string& user) const;

    /// The author's most recent post created strictly before `post_index`'s post.
    std::optional<std::size_t> previous_post(std::size_t post_index) const;

    /// The user's latest comment with absolute time < `before`, skipping `exclude_post`.
    std::optional<CommentRef> latest_comment_before(const std::string& user, double before,
                                                    std::size_t exclude_post) const;

    double absolute_time(std::size_t post, std::size_t comment) const;

    bool operator==(const Corpus& other) const { return posts_ == other.posts_; }

private:
    std::vector<Post> posts_;
    std::unordered_map<std::string, std::size_t> by_id_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_author_;
    std::unordered_map<std::string, std::vector<CommentRef>> by_user_;
};

/// Reads the JSONL corpus format: one post object per line,
/// `{"id","author","created_at","comments":[{"id","author","text","t","hostile"}]}`.
/// Throws DataError naming the offending line.
Corpus read_corpus(std::istream& in);
Corpus load_corpus(const std::filesystem::path& path);

void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

} // namespace hostility
