#include "hostility/features.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"
#include "hostility/trend.hpp"

#include <algorithm>
#include <map>
#include <sstream>
#include <unordered_set>

namespace hostility {

namespace {

constexpr std::array<std::string_view, 9> kGroupNames = {"U",        "lex",      "w2v",       "n-w2v", "final-com",
                                                         "prev-com", "prev-post", "trend", "user"};

} // namespace

std::string_view group_name(Group g)
{
    return kGroupNames[static_cast<std::size_t>(g)];
}

Group parse_group(std::string_view name)
{
    for (std::size_t i = 0; i < kGroupNames.size(); ++i) {
        if (kGroupNames[i] == name) {
            return static_cast<Group>(i);
        }
    }
    throw ConfigError("unknown feature group '" + std::string(name) + "'");
}

GroupSet::GroupSet(std::initializer_list<Group> groups)
{
    for (auto g : groups) {
        insert(g);
    }
}

std::vector<Group> GroupSet::groups() const
{
    std::vector<Group> out;
    for (auto g : kAllGroups) {
        if (contains(g)) {
            out.push_back(g);
        }
    }
    return out;
}

std::string GroupSet::name() const
{
    std::string out;
    for (auto g : groups()) {
        if (!out.empty()) {
            out += '+';
        }
        out += group_name(g);
    }
    return out;
}

GroupSet GroupSet::parse(std::string_view spec)
{
    GroupSet set;
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto end = spec.find_first_of("+,", start);
        if (end == std::string_view::npos) {
            end = spec.size();
        }
        auto part = spec.substr(start, end - start);
        while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
        while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
        if (!part.empty()) {
            set.insert(parse_group(part));
        }
        start = end + 1;
    }
    if (set.empty()) {
        throw ConfigError("empty feature set '" + std::string(spec) + "'");
    }
    return set;
}

GroupSet GroupSet::all()
{
    GroupSet s;
    for (auto g : kAllGroups) {
        s.insert(g);
    }
    return s;
}

FeatureLayout::FeatureLayout(GroupSet groups, const Vocabulary& vocab, int embed_dim)
    : groups_(groups), embed_dim_(embed_dim), vocab_size_(static_cast<Eigen::Index>(vocab.size()))
{
    if (groups.empty()) {
        throw ConfigError("feature layout needs at least one group");
    }
    const auto lex_names = lexicon_feature_names();
    auto add = [&](const std::string& name, bool standardize) {
        names_.push_back(name);
        standardized_.push_back(standardize);
    };
    auto add_unigrams = [&](const std::string& prefix) {
        for (const auto& t : vocab.tokens()) {
            add(prefix + "U:" + t, false);
        }
    };
    auto add_embedding = [&](const std::string& prefix) {
        for (int d = 0; d < embed_dim; ++d) {
            add(prefix + "max" + std::to_string(d), true);
        }
        for (int d = 0; d < embed_dim; ++d) {
            add(prefix + "mean" + std::to_string(d), true);
        }
    };
    auto add_lexicon = [&](const std::string& prefix) {
        for (const auto& n : lex_names) {
            add(prefix + n, true);
        }
    };

    for (auto g : groups.groups()) {
        FeatureBlock block{g, static_cast<Eigen::Index>(names_.size()), 0};
        const std::string gname(group_name(g));
        switch (g) {
        case Group::U:
            add_unigrams("");
            break;
        case Group::Lex:
            add_lexicon("lex:");
            break;
        case Group::W2v:
            add_embedding("w2v:");
            break;
        case Group::NW2v:
            add_embedding("n-w2v:");
            break;
        case Group::FinalCom:
        case Group::PrevCom:
        case Group::PrevPost:
            add_unigrams(gname + ":");
            add_embedding(gname + ":n-w2v:");
            add_lexicon(gname + ":lex:");
            if (g != Group::FinalCom) {
                add(gname + ":missing", true);
            }
            break;
        case Group::Trend:
            for (const char* n : {"count_above", "frac_above", "max_slope", "range"}) {
                add(std::string("trend:") + n, true);
            }
            break;
        case Group::User:
            add("user:unique_ratio", true);
            add("user:mention_frac", true);
            break;
        }
        block.size = static_cast<Eigen::Index>(names_.size()) - block.offset;
        blocks_.push_back(block);
    }
    dimension_ = static_cast<Eigen::Index>(names_.size());

    std::string joined;
    for (const auto& n : names_) {
        joined += n;
        joined += '\n';
    }
    fingerprint_ = sha256_hex(joined).substr(0, 16);
}

std::optional<FeatureBlock> FeatureLayout::block(Group g) const
{
    for (const auto& b : blocks_) {
        if (b.group == g) {
            return b;
        }
    }
    return std::nullopt;
}

Group FeatureLayout::group_of(Eigen::Index column) const
{
    for (const auto& b : blocks_) {
        if (column >= b.offset && column < b.offset + b.size) {
            return b.group;
        }
    }
    throw std::out_of_range("column outside feature layout");
}

Eigen::SparseVector<double> bow(const TokenSeq& tokens, const Vocabulary& vocab)
{
    std::map<Eigen::Index, double> counts;
    for (const auto& t : tokens) {
        if (auto idx = vocab.find(t)) {
            counts[*idx] += 1.0;
        }
    }
    Eigen::SparseVector<double> v(static_cast<Eigen::Index>(vocab.size()));
    v.reserve(static_cast<Eigen::Index>(counts.size()));
    for (const auto& [i, c] : counts) {
        v.insertBack(i) = c;
    }
    return v;
}

TokenizedCorpus::TokenizedCorpus(const Corpus& corpus)
{
    tokens_.reserve(corpus.size());
    for (const auto& post : corpus.posts()) {
        std::vector<TokenSeq> per_post;
        per_post.reserve(post.comments.size());
        for (const auto& c : post.comments) {
            per_post.push_back(tokenize(c.text));
        }
        tokens_.push_back(std::move(per_post));
    }
}

Eigen::Vector2d user_activity_features(const Corpus& corpus, const TokenizedCorpus& tokens, std::size_t post,
                                       std::size_t k)
{
    const auto& p = corpus.post(post);
    if (k < 1 || k > p.comments.size()) {
        throw DataError("observed comment count out of range for post '" + p.id + "'");
    }
    std::unordered_set<std::string> authors;
    std::size_t mentions = 0;
    for (std::size_t i = 0; i < k; ++i) {
        authors.insert(p.comments[i].author);
        if (contains_mention(tokens.tokens(post, i))) {
            ++mentions;
        }
    }
    const double n = static_cast<double>(k);
    return {static_cast<double>(authors.size()) / n, static_cast<double>(mentions) / n};
}

FeatureSources extract_sources(const Corpus& corpus, const TokenizedCorpus& tokens, std::size_t post, std::size_t k)
{
    const auto& p = corpus.post(post);
    if (k < 1 || k > p.comments.size()) {
        throw DataError("observed comment count " + std::to_string(k) + " out of range for post '" + p.id + "'");
    }
    FeatureSources s;
    s.post = post;
    s.k = k;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& t = tokens.tokens(post, i);
        s.observed.insert(s.observed.end(), t.begin(), t.end());
    }
    s.final_comment = tokens.tokens(post, k - 1);

    const double cutoff = corpus.absolute_time(post, k - 1);
    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < k; ++i) {
        const auto& author = p.comments[i].author;
        if (!seen.insert(author).second) {
            continue;
        }
        if (auto ref = corpus.latest_comment_before(author, cutoff, post)) {
            const auto& t = tokens.tokens(ref->post, ref->comment);
            s.prev_comments.insert(s.prev_comments.end(), t.begin(), t.end());
            s.prev_comments_missing = false;
        }
    }

    if (auto prev = corpus.previous_post(post)) {
        s.prev_post_missing = false;
        for (const auto& t : tokens.post_tokens(*prev)) {
            s.prev_post.insert(s.prev_post.end(), t.begin(), t.end());
        }
    }
    s.user_activity = user_activity_features(corpus, tokens, post, k);
    return s;
}

DenseSources compute_dense(const FeatureSources& sources, const Lexicons& lexicons, const GroupSet& groups,
                           EmbeddingLookups lookups, int embed_dim)
{
    const bool need_sub = groups.contains(Group::NW2v) || groups.contains(Group::FinalCom) ||
                          groups.contains(Group::PrevCom) || groups.contains(Group::PrevPost);
    if (groups.contains(Group::W2v) && !lookups.words) {
        throw ConfigError("w2v features need a word embedding table");
    }
    if (need_sub && !lookups.subwords) {
        throw ConfigError("n-w2v features need a subword embedding table");
    }
    auto sub = [&](const TokenSeq& t) {
        return lookups.subwords ? embed_aggregate(t, *lookups.subwords) : Eigen::VectorXd::Zero(2 * embed_dim).eval();
    };
    DenseSources d;
    d.lex_observed = lexicon_features(sources.observed, lexicons);
    d.lex_final = lexicon_features(sources.final_comment, lexicons);
    d.lex_prev_comments = lexicon_features(sources.prev_comments, lexicons);
    d.lex_prev_post = lexicon_features(sources.prev_post, lexicons);
    d.w2v_observed = groups.contains(Group::W2v) ? embed_aggregate(sources.observed, *lookups.words)
                                                 : Eigen::VectorXd::Zero(2 * embed_dim).eval();
    d.nw2v_observed = groups.contains(Group::NW2v) ? sub(sources.observed) : Eigen::VectorXd::Zero(2 * embed_dim).eval();
    d.nw2v_final = groups.contains(Group::FinalCom) ? sub(sources.final_comment)
                                                    : Eigen::VectorXd::Zero(2 * embed_dim).eval();
    d.nw2v_prev_comments = groups.contains(Group::PrevCom) ? sub(sources.prev_comments)
                                                           : Eigen::VectorXd::Zero(2 * embed_dim).eval();
    d.nw2v_prev_post = groups.contains(Group::PrevPost) ? sub(sources.prev_post)
                                                        : Eigen::VectorXd::Zero(2 * embed_dim).eval();
    return d;
}

namespace {

class RowBuilder {
public:
    explicit RowBuilder(Eigen::Index dim) : v_(dim) {}

    void put(Eigen::Index i, double value)
    {
        if (value != 0.0) {
            v_.insertBack(i) = value;
        }
    }
    template <typename Derived>
    void put_dense(Eigen::Index offset, const Eigen::MatrixBase<Derived>& values)
    {
        for (Eigen::Index i = 0; i < values.size(); ++i) {
            put(offset + i, values(i));
        }
    }
    void put_sparse(Eigen::Index offset, const Eigen::SparseVector<double>& values)
    {
        for (Eigen::SparseVector<double>::InnerIterator it(values); it; ++it) {
            put(offset + it.index(), it.value());
        }
    }
    Eigen::SparseVector<double> finish() { return std::move(v_); }

private:
    Eigen::SparseVector<double> v_;
};

} // namespace

FeatureVector assemble(const std::shared_ptr<const FeatureLayout>& layout, const FeatureSources& sources,
                       const DenseSources& dense, const Vocabulary& vocab, std::span<const double> posteriors,
                       double trend_threshold)
{
    if (static_cast<Eigen::Index>(vocab.size()) != layout->vocab_size()) {
        throw ConfigError("vocabulary does not match feature layout");
    }
    const Eigen::Index vsize = layout->vocab_size();
    const Eigen::Index esize = 2 * layout->embed_dim();
    RowBuilder row(layout->dimension());
    auto composite = [&](Eigen::Index offset, const TokenSeq& tokens, const Eigen::VectorXd& emb,
                         const LexiconVector& lex) {
        row.put_sparse(offset, bow(tokens, vocab));
        row.put_dense(offset + vsize, emb);
        row.put_dense(offset + vsize + esize, lex);
    };

    for (const auto& b : layout->blocks()) {
        switch (b.group) {
        case Group::U:
            row.put_sparse(b.offset, bow(sources.observed, vocab));
            break;
        case Group::Lex:
            row.put_dense(b.offset, dense.lex_observed);
            break;
        case Group::W2v:
            row.put_dense(b.offset, dense.w2v_observed);
            break;
        case Group::NW2v:
            row.put_dense(b.offset, dense.nw2v_observed);
            break;
        case Group::FinalCom:
            composite(b.offset, sources.final_comment, dense.nw2v_final, dense.lex_final);
            break;
        case Group::PrevCom:
            composite(b.offset, sources.prev_comments, dense.nw2v_prev_comments, dense.lex_prev_comments);
            row.put(b.offset + b.size - 1, sources.prev_comments_missing ? 1.0 : 0.0);
            break;
        case Group::PrevPost:
            composite(b.offset, sources.prev_post, dense.nw2v_prev_post, dense.lex_prev_post);
            row.put(b.offset + b.size - 1, sources.prev_post_missing ? 1.0 : 0.0);
            break;
        case Group::Trend:
            if (posteriors.size() != sources.k) {
                throw ConfigError("trend features need one posterior per observed comment");
            }
            row.put_dense(b.offset, trend_features(posteriors, trend_threshold));
            break;
        case Group::User:
            row.put_dense(b.offset, sources.user_activity);
            break;
        }
    }
    return {layout, row.finish()};
}

FeatureVector assemble(std::size_t post, std::size_t k, const GroupSet& groups, const FeatureResources& r,
                       std::span<const double> posteriors)
{
    if (!r.corpus || !r.tokens || !r.vocab || !r.lexicons) {
        throw ConfigError("feature resources are incomplete");
    }
    std::optional<CachedLookup> words;
    std::optional<CachedLookup> subwords;
    if (r.words) words.emplace(*r.words);
    if (r.subwords) subwords.emplace(*r.subwords);
    const auto sources = extract_sources(*r.corpus, *r.tokens, post, k);
    const auto dense = compute_dense(sources, *r.lexicons, groups,
                                     {words ? &*words : nullptr, subwords ? &*subwords : nullptr}, r.embed_dim);
    auto layout = std::make_shared<const FeatureLayout>(groups, *r.vocab, r.embed_dim);
    return assemble(layout, sources, dense, *r.vocab, posteriors, r.trend_threshold);
}

Eigen::SparseMatrix<double, Eigen::RowMajor> stack_rows(std::span<const FeatureVector> rows)
{
    if (rows.empty()) {
        return {};
    }
    const Eigen::Index dim = rows.front().values.size();
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].values.size() != dim) {
            throw ConfigError("feature rows have inconsistent dimensions");
        }
        for (Eigen::SparseVector<double>::InnerIterator it(rows[r].values); it; ++it) {
            triplets.emplace_back(static_cast<Eigen::Index>(r), it.index(), it.value());
        }
    }
    Eigen::SparseMatrix<double, Eigen::RowMajor> m(static_cast<Eigen::Index>(rows.size()), dim);
    m.setFromTriplets(triplets.begin(), triplets.end());
    return m;
}

std::string feature_dump_csv(const FeatureVector& v)
{
    std::ostringstream out;
    out << "group,index,name,value\n";
    for (Eigen::SparseVector<double>::InnerIterator it(v.values); it; ++it) {
        out << group_name(v.layout->group_of(it.index())) << ',' << it.index() << ',' << v.layout->name(it.index())
            << ',' << format_double(it.value()) << '\n';
    }
    return out.str();
}

} // namespace hostility
