#include "hostility/embed.hpp"

#include "hostility/error.hpp"
#include "hostility/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <sstream>

namespace hostility {

namespace {

std::size_t utf8_length(unsigned char lead)
{
    if (lead < 0x80) return 1;
    if ((lead & 0xE0) == 0xC0) return 2;
    if ((lead & 0xF0) == 0xE0) return 3;
    if ((lead & 0xF8) == 0xF0) return 4;
    return 1;
}

// log(sigmoid(x)) without overflow.
double log_sigmoid(double x)
{
    return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

double sigmoid(double x)
{
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

} // namespace

std::vector<std::string> char_ngrams(const std::string& word, int min_n, int max_n)
{
    const std::string bracketed = "<" + word + ">";
    std::vector<std::size_t> starts; // byte offset of each codepoint
    for (std::size_t i = 0; i < bracketed.size(); i += utf8_length(static_cast<unsigned char>(bracketed[i]))) {
        starts.push_back(i);
    }
    const std::size_t n_cp = starts.size();
    starts.push_back(bracketed.size());

    std::vector<std::string> grams;
    for (std::size_t i = 0; i < n_cp; ++i) {
        for (int n = min_n; n <= max_n; ++n) {
            const std::size_t end = i + static_cast<std::size_t>(n);
            if (end > n_cp) {
                break;
            }
            if (i == 0 && end == n_cp) {
                continue; // whole bracketed word is covered by the word vector
            }
            grams.push_back(bracketed.substr(starts[i], starts[end] - starts[i]));
        }
    }
    return grams;
}

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim)
{
    if (dim < 1) {
        throw ConfigError("embedding dimension must be >= 1");
    }
}

std::optional<std::size_t> EmbeddingTable::word_index(const std::string& word) const
{
    auto it = word_index_.find(word);
    if (it == word_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::optional<std::size_t> EmbeddingTable::ngram_index(const std::string& ngram) const
{
    auto it = ngram_index_.find(ngram);
    if (it == ngram_index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

Eigen::VectorXd EmbeddingTable::ngram_sum(const std::string& word) const
{
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
    for (const auto& g : char_ngrams(word, min_n_, max_n_)) {
        if (auto idx = ngram_index(g)) {
            sum += ngram_vector(*idx);
        }
    }
    return sum;
}

std::optional<Eigen::VectorXd> EmbeddingTable::lookup(const std::string& token) const
{
    if (auto idx = word_index(token)) {
        return Eigen::VectorXd(word_vector(*idx));
    }
    if (!subword_) {
        return std::nullopt;
    }
    bool any = false;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(dim_);
    for (const auto& g : char_ngrams(token, min_n_, max_n_)) {
        if (auto idx = ngram_index(g)) {
            sum += ngram_vector(*idx);
            any = true;
        }
    }
    if (!any) {
        return std::nullopt;
    }
    return sum;
}

std::size_t EmbeddingTable::push_word(const std::string& word)
{
    if (word.empty() || word.find_first_of(" \t\n") != std::string::npos) {
        throw DataError("invalid embedding token '" + word + "'");
    }
    if (!word_index_.emplace(word, words_.size()).second) {
        throw DataError("duplicate embedding token '" + word + "'");
    }
    words_.push_back(word);
    return words_.size() - 1;
}

void EmbeddingTable::add_word(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& v)
{
    if (v.size() != dim_) {
        throw DataError("vector for '" + word + "' has wrong dimension");
    }
    if (subword_) {
        add_composed_word(word, v);
        return;
    }
    push_word(word);
    word_data_.insert(word_data_.end(), v.data(), v.data() + dim_);
}

void EmbeddingTable::enable_subwords(int min_n, int max_n)
{
    if (min_n < 1 || max_n < min_n) {
        throw ConfigError("invalid n-gram range");
    }
    if (!words_.empty()) {
        throw ConfigError("enable_subwords must precede add_word");
    }
    subword_ = true;
    min_n_ = min_n;
    max_n_ = max_n;
}

void EmbeddingTable::add_ngram(const std::string& ngram, const Eigen::Ref<const Eigen::VectorXd>& v)
{
    if (!subword_) {
        throw ConfigError("n-gram vectors require subword mode");
    }
    if (v.size() != dim_) {
        throw DataError("vector for n-gram '" + ngram + "' has wrong dimension");
    }
    if (!ngram_index_.emplace(ngram, ngrams_.size()).second) {
        throw DataError("duplicate n-gram '" + ngram + "'");
    }
    ngrams_.push_back(ngram);
    ngram_data_.insert(ngram_data_.end(), v.data(), v.data() + dim_);
}

void EmbeddingTable::add_subword_word(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& whole)
{
    if (!subword_) {
        throw ConfigError("add_subword_word requires subword mode");
    }
    if (whole.size() != dim_) {
        throw DataError("vector for '" + word + "' has wrong dimension");
    }
    const Eigen::VectorXd composed = whole + ngram_sum(word);
    push_word(word);
    whole_data_.insert(whole_data_.end(), whole.data(), whole.data() + dim_);
    word_data_.insert(word_data_.end(), composed.data(), composed.data() + dim_);
}

void EmbeddingTable::add_composed_word(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& composed)
{
    const Eigen::VectorXd whole = composed - ngram_sum(word);
    push_word(word);
    whole_data_.insert(whole_data_.end(), whole.data(), whole.data() + dim_);
    word_data_.insert(word_data_.end(), composed.data(), composed.data() + dim_);
}

bool EmbeddingTable::operator==(const EmbeddingTable& other) const
{
    return dim_ == other.dim_ && subword_ == other.subword_ && words_ == other.words_ && ngrams_ == other.ngrams_ &&
           word_data_ == other.word_data_ && ngram_data_ == other.ngram_data_;
}

double sgns_term(const Eigen::Ref<const Eigen::VectorXd>& h, const Eigen::Ref<const Eigen::VectorXd>& u, bool positive,
                 Eigen::Ref<Eigen::VectorXd> grad_h, Eigen::Ref<Eigen::VectorXd> grad_u)
{
    const double score = h.dot(u);
    const double sign = positive ? 1.0 : -1.0;
    // d/ds [-log sigmoid(sign*s)] = -sign * sigmoid(-sign*s)
    const double g = -sign * sigmoid(-sign * score);
    grad_h.noalias() += g * u;
    grad_u.noalias() = g * h;
    return -log_sigmoid(sign * score);
}

SgnsGradient sgns_loss_gradient(const Eigen::Ref<const Eigen::VectorXd>& center,
                                const Eigen::Ref<const Eigen::VectorXd>& context,
                                const Eigen::Ref<const Eigen::MatrixXd>& negatives)
{
    SgnsGradient out;
    out.center = Eigen::VectorXd::Zero(center.size());
    out.context.resize(center.size());
    out.negatives.resize(center.size(), negatives.cols());
    out.loss = sgns_term(center, context, true, out.center, out.context);
    for (Eigen::Index k = 0; k < negatives.cols(); ++k) {
        out.loss += sgns_term(center, negatives.col(k), false, out.center, out.negatives.col(k));
    }
    return out;
}

namespace {

struct TrainingVocab {
    std::vector<std::string> words;
    std::vector<std::size_t> counts;
    std::vector<std::vector<int>> sentences;
    std::size_t total = 0;
};

TrainingVocab prepare(std::span<const TokenSeq> sentences, std::size_t min_count)
{
    std::map<std::string, std::size_t> counts;
    for (const auto& s : sentences) {
        for (const auto& t : s) {
            ++counts[t];
        }
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [w, c] : counts) {
        if (c >= min_count) {
            kept.emplace_back(w, c);
        }
    }
    if (kept.empty()) {
        throw DataError("embedding vocabulary is empty after min-count filtering");
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });

    TrainingVocab v;
    std::unordered_map<std::string, int> ids;
    for (const auto& [w, c] : kept) {
        ids.emplace(w, static_cast<int>(v.words.size()));
        v.words.push_back(w);
        v.counts.push_back(c);
    }
    for (const auto& s : sentences) {
        std::vector<int> ids_in;
        for (const auto& t : s) {
            if (auto it = ids.find(t); it != ids.end()) {
                ids_in.push_back(it->second);
            }
        }
        v.total += ids_in.size();
        if (ids_in.size() >= 2) {
            v.sentences.push_back(std::move(ids_in));
        }
    }
    return v;
}

bool all_finite(const Eigen::MatrixXd& m)
{
    return m.allFinite();
}

EmbeddingTable train_impl(std::span<const TokenSeq> sentences, const SgnsOptions& opt, bool subword, SgnsLog* log)
{
    if (opt.dim < 1 || opt.window < 1 || opt.negatives < 0 || opt.epochs < 1 || !(opt.learning_rate > 0)) {
        throw ConfigError("invalid embedding training options");
    }
    if (sentences.empty()) {
        throw DataError("no sentences to train embeddings on");
    }
    const TrainingVocab vocab = prepare(sentences, opt.min_count);
    const auto n_words = static_cast<Eigen::Index>(vocab.words.size());
    const Eigen::Index dim = opt.dim;

    // n-gram inventory in sorted order; per-word component lists.
    std::vector<std::string> ngram_list;
    std::vector<std::vector<int>> word_ngrams(vocab.words.size());
    if (subword) {
        std::map<std::string, int> ngram_ids;
        for (const auto& w : vocab.words) {
            for (auto& g : char_ngrams(w, opt.min_n, opt.max_n)) {
                ngram_ids.emplace(std::move(g), 0);
            }
        }
        int next = 0;
        for (auto& [g, id] : ngram_ids) {
            id = next++;
            ngram_list.push_back(g);
        }
        for (std::size_t w = 0; w < vocab.words.size(); ++w) {
            for (const auto& g : char_ngrams(vocab.words[w], opt.min_n, opt.max_n)) {
                word_ngrams[w].push_back(ngram_ids.at(g));
            }
        }
    }

    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double init = 0.5 / static_cast<double>(dim);
    auto random_matrix = [&](Eigen::Index cols) {
        Eigen::MatrixXd m(dim, cols);
        for (Eigen::Index j = 0; j < cols; ++j) {
            for (Eigen::Index i = 0; i < dim; ++i) {
                m(i, j) = (2.0 * unif(rng) - 1.0) * init;
            }
        }
        return m;
    };
    Eigen::MatrixXd input = random_matrix(n_words);
    Eigen::MatrixXd ngram_input = random_matrix(static_cast<Eigen::Index>(ngram_list.size()));
    Eigen::MatrixXd output = Eigen::MatrixXd::Zero(dim, n_words);

    // unigram^0.75 negative-sampling distribution
    std::vector<double> cumulative(vocab.counts.size());
    double acc = 0.0;
    for (std::size_t w = 0; w < vocab.counts.size(); ++w) {
        acc += std::pow(static_cast<double>(vocab.counts[w]), 0.75);
        cumulative[w] = acc;
    }
    auto sample_negative = [&]() {
        const double r = unif(rng) * acc;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
        return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), n_words - 1));
    };

    std::vector<double> keep_prob(vocab.counts.size(), 1.0);
    if (opt.subsample > 0) {
        const double threshold = opt.subsample * static_cast<double>(vocab.total);
        for (std::size_t w = 0; w < vocab.counts.size(); ++w) {
            const double f = static_cast<double>(vocab.counts[w]);
            keep_prob[w] = std::min(1.0, (std::sqrt(f / threshold) + 1.0) * threshold / f);
        }
    }

    Eigen::VectorXd h(dim), grad_h(dim), grad_u(dim);
    const double total_work = static_cast<double>(opt.epochs) * static_cast<double>(std::max<std::size_t>(vocab.total, 1));
    double processed = 0.0;
    std::vector<int> kept;
    if (log) {
        log->epoch_loss.clear();
        log->vocab_size = vocab.words.size();
        log->ngram_count = ngram_list.size();
    }

    for (int epoch = 0; epoch < opt.epochs; ++epoch) {
        double loss_sum = 0.0;
        std::size_t pairs = 0;
        for (const auto& sentence : vocab.sentences) {
            kept.clear();
            for (int w : sentence) {
                if (keep_prob[static_cast<std::size_t>(w)] >= 1.0 || unif(rng) < keep_prob[static_cast<std::size_t>(w)]) {
                    kept.push_back(w);
                }
            }
            const double lr = opt.learning_rate * std::max(1e-4, 1.0 - processed / total_work);
            processed += static_cast<double>(sentence.size());
            const auto len = static_cast<int>(kept.size());
            for (int i = 0; i < len; ++i) {
                const int center = kept[static_cast<std::size_t>(i)];
                const auto& grams = word_ngrams[static_cast<std::size_t>(center)];
                const int reach = 1 + static_cast<int>(unif(rng) * opt.window) % opt.window;
                for (int j = std::max(0, i - reach); j <= std::min(len - 1, i + reach); ++j) {
                    if (j == i) {
                        continue;
                    }
                    const int context = kept[static_cast<std::size_t>(j)];
                    h = input.col(center);
                    for (int g : grams) {
                        h += ngram_input.col(g);
                    }
                    grad_h.setZero();
                    loss_sum += sgns_term(h, output.col(context), true, grad_h, grad_u);
                    output.col(context) -= lr * grad_u;
                    for (int k = 0; k < opt.negatives; ++k) {
                        const int neg = sample_negative();
                        if (neg == context) {
                            continue;
                        }
                        loss_sum += sgns_term(h, output.col(neg), false, grad_h, grad_u);
                        output.col(neg) -= lr * grad_u;
                    }
                    ++pairs;
                    // Every component receives the same gradient; the step is
                    // shared across components so the composed vector moves by lr.
                    const double input_lr = lr / static_cast<double>(1 + grams.size());
                    input.col(center) -= input_lr * grad_h;
                    for (int g : grams) {
                        ngram_input.col(g) -= input_lr * grad_h;
                    }
                }
            }
        }
        if (!all_finite(input) || !all_finite(output) || !all_finite(ngram_input)) {
            throw std::runtime_error("embedding training diverged (non-finite values) in epoch " +
                                     std::to_string(epoch));
        }
        if (log) {
            log->epoch_loss.push_back(pairs ? loss_sum / static_cast<double>(pairs) : 0.0);
        }
    }

    EmbeddingTable table(opt.dim);
    if (subword) {
        table.enable_subwords(opt.min_n, opt.max_n);
        for (std::size_t g = 0; g < ngram_list.size(); ++g) {
            table.add_ngram(ngram_list[g], ngram_input.col(static_cast<Eigen::Index>(g)));
        }
        for (Eigen::Index w = 0; w < n_words; ++w) {
            table.add_subword_word(vocab.words[static_cast<std::size_t>(w)], input.col(w));
        }
    } else {
        for (Eigen::Index w = 0; w < n_words; ++w) {
            table.add_word(vocab.words[static_cast<std::size_t>(w)], input.col(w));
        }
    }
    return table;
}

void write_rows(std::ostringstream& out, const std::vector<std::string>& names, int dim,
                const std::function<Eigen::Map<const Eigen::VectorXd>(std::size_t)>& row)
{
    out << names.size() << ' ' << dim << '\n';
    for (std::size_t i = 0; i < names.size(); ++i) {
        out << names[i];
        const auto v = row(i);
        for (Eigen::Index d = 0; d < v.size(); ++d) {
            out << ' ' << format_double(v(d));
        }
        out << '\n';
    }
}

struct Rows {
    int dim = 0;
    std::vector<std::string> names;
    std::vector<Eigen::VectorXd> vectors;
};

Rows read_rows(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open embedding table " + path.string());
    }
    Rows rows;
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path.string() + ":1: missing header");
    }
    std::istringstream header(line);
    std::size_t count = 0;
    if (!(header >> count >> rows.dim) || rows.dim < 1) {
        throw DataError(path.string() + ":1: malformed header");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        std::istringstream ls(line);
        std::string token;
        ls >> token;
        std::vector<double> values;
        std::string field;
        while (ls >> field) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (used != field.size()) {
                    throw std::invalid_argument(field);
                }
            } catch (const std::exception&) {
                throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed value '" + field + "'");
            }
        }
        if (values.size() != static_cast<std::size_t>(rows.dim)) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(rows.dim) +
                            " values, found " + std::to_string(values.size()));
        }
        rows.names.push_back(token);
        rows.vectors.push_back(Eigen::Map<Eigen::VectorXd>(values.data(), rows.dim));
    }
    if (rows.names.size() != count) {
        throw DataError(path.string() + ": header declares " + std::to_string(count) + " rows, found " +
                        std::to_string(rows.names.size()));
    }
    return rows;
}

} // namespace

EmbeddingTable train_sgns(std::span<const TokenSeq> sentences, const SgnsOptions& options, SgnsLog* log)
{
    return train_impl(sentences, options, false, log);
}

EmbeddingTable train_subword_sgns(std::span<const TokenSeq> sentences, const SgnsOptions& options, SgnsLog* log)
{
    return train_impl(sentences, options, true, log);
}

std::filesystem::path ngram_sibling(const std::filesystem::path& path)
{
    auto p = path;
    p += ".ngrams";
    return p;
}

void save_table(const EmbeddingTable& table, const std::filesystem::path& path)
{
    std::ostringstream words;
    write_rows(words, table.words(), table.dimension(), [&](std::size_t i) { return table.word_vector(i); });
    if (table.has_subwords()) {
        std::ostringstream grams;
        write_rows(grams, table.ngrams(), table.dimension(), [&](std::size_t i) { return table.ngram_vector(i); });
        write_file_atomic(ngram_sibling(path), grams.str());
    }
    write_file_atomic(path, words.str());
}

EmbeddingTable load_table(const std::filesystem::path& path)
{
    const Rows words = read_rows(path);
    EmbeddingTable table(words.dim);
    const auto sibling = ngram_sibling(path);
    if (std::filesystem::exists(sibling)) {
        const Rows grams = read_rows(sibling);
        if (grams.dim != words.dim) {
            throw DataError(sibling.string() + ": dimension " + std::to_string(grams.dim) +
                            " does not match word table dimension " + std::to_string(words.dim));
        }
        int min_n = 3;
        int max_n = 6;
        if (!grams.names.empty()) {
            min_n = std::numeric_limits<int>::max();
            max_n = 0;
            for (const auto& g : grams.names) {
                int cps = 0;
                for (std::size_t i = 0; i < g.size(); i += utf8_length(static_cast<unsigned char>(g[i]))) {
                    ++cps;
                }
                min_n = std::min(min_n, cps);
                max_n = std::max(max_n, cps);
            }
        }
        table.enable_subwords(min_n, max_n);
        for (std::size_t i = 0; i < grams.names.size(); ++i) {
            table.add_ngram(grams.names[i], grams.vectors[i]);
        }
    }
    for (std::size_t i = 0; i < words.names.size(); ++i) {
        table.add_word(words.names[i], words.vectors[i]);
    }
    return table;
}

const std::optional<Eigen::VectorXd>& CachedLookup::operator()(const std::string& token)
{
    auto it = cache_.find(token);
    if (it == cache_.end()) {
        it = cache_.emplace(token, table_->lookup(token)).first;
    }
    return it->second;
}

namespace {

template <typename Lookup>
Eigen::VectorXd aggregate(const TokenSeq& tokens, int dim, Lookup&& lookup)
{
    Eigen::VectorXd out = Eigen::VectorXd::Zero(2 * dim);
    auto max_block = out.head(dim);
    auto mean_block = out.tail(dim);
    int n = 0;
    for (const auto& t : tokens) {
        const auto& v = lookup(t);
        if (!v) {
            continue;
        }
        if (n == 0) {
            max_block = *v;
        } else {
            max_block = max_block.cwiseMax(*v);
        }
        mean_block += *v;
        ++n;
    }
    if (n > 0) {
        mean_block /= static_cast<double>(n);
    }
    return out;
}

} // namespace

Eigen::VectorXd embed_aggregate(const TokenSeq& tokens, const EmbeddingTable& table)
{
    std::optional<Eigen::VectorXd> holder;
    return aggregate(tokens, table.dimension(), [&](const std::string& t) -> const std::optional<Eigen::VectorXd>& {
        holder = table.lookup(t);
        return holder;
    });
}

Eigen::VectorXd embed_aggregate(const TokenSeq& tokens, CachedLookup& lookup)
{
    return aggregate(tokens, lookup.table().dimension(), lookup);
}

} // namespace hostility
