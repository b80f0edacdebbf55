#pragma once

#include "hostility/corpus.hpp"
#include "hostility/text.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace hostility::testing {

inline std::filesystem::path data_dir()
{
    return HOSTILITY_TEST_DATA;
}

inline const Lexicons& test_lexicons()
{
    static const Lexicons lex = load_lexicons(data_dir() / "lexicons");
    return lex;
}

inline Comment make_comment(std::string id, std::string author, std::string text, double t, bool hostile = false)
{
    Comment c;
    c.id = std::move(id);
    c.author = std::move(author);
    c.text = std::move(text);
    c.t = t;
    c.hostile = hostile;
    return c;
}

inline Post make_post(std::string id, std::string author, double created_at, std::vector<Comment> comments)
{
    Post p;
    p.id = std::move(id);
    p.author = std::move(author);
    p.created_at = created_at;
    p.comments = std::move(comments);
    return p;
}

/// Post whose comments arrive one per `gap` seconds; `hostile` lists the
/// hostile comment indices.
inline Post timed_post(const std::string& id, const std::string& author, double created_at, std::size_t n,
                       double gap, const std::vector<std::size_t>& hostile = {})
{
    std::vector<Comment> comments;
    for (std::size_t i = 0; i < n; ++i) {
        bool h = false;
        for (auto j : hostile) {
            h = h || j == i;
        }
        char cid[16];
        std::snprintf(cid, sizeof cid, "c%03zu", i);
        comments.push_back(make_comment(cid, "u" + std::to_string(i % 5), h ? "you suck" : "nice photo",
                                        gap * static_cast<double>(i + 1), h));
    }
    return make_post(id, author, created_at, std::move(comments));
}

/// Temporary directory removed on destruction.
class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("hostility-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir()
    {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline double relative_error(double a, double b)
{
    return std::abs(a - b) / std::max({1e-8, std::abs(a), std::abs(b)});
}

} // namespace hostility::testing
