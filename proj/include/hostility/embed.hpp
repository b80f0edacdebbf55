#pragma once

#include "hostility/text.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace hostility {

struct SgnsOptions {
    int dim = 100;
    int window = 5;
    int negatives = 5;
    int epochs = 5;
    double learning_rate = 0.025; ///< decays linearly to 1e-4 of this value
    std::size_t min_count = 2;
    double subsample = 1e-3; ///< frequent-word subsampling threshold; 0 disables
    int min_n = 3;           ///< character n-gram range for the subword model
    int max_n = 6;
    std::uint64_t seed = 1;
};

struct SgnsLog {
    std::vector<double> epoch_loss; ///< mean negative-sampling loss per processed pair
    std::size_t vocab_size = 0;
    std::size_t ngram_count = 0;
};

/// Character n-grams of `<word>` with lengths in [min_n, max_n], counted in
/// codepoints. The full bracketed word itself is excluded.
std::vector<std::string> char_ngrams(const std::string& word, int min_n, int max_n);

/// Word vectors, optionally backed by character n-gram vectors.
///
/// In subword mode an in-vocabulary word's vector is the sum of its own
/// whole-word vector and the vectors of its n-grams; an out-of-vocabulary
/// word is composed from whichever of its n-grams are known.
class EmbeddingTable {
public:
    explicit EmbeddingTable(int dim = 100);

    int dimension() const { return dim_; }
    std::size_t word_count() const { return words_.size(); }
    std::size_t ngram_count() const { return ngrams_.size(); }
    bool has_subwords() const { return subword_; }
    int min_n() const { return min_n_; }
    int max_n() const { return max_n_; }

    const std::vector<std::string>& words() const { return words_; }
    const std::vector<std::string>& ngrams() const { return ngrams_; }

    /// Stored (composed) vector of an in-vocabulary word.
    Eigen::Map<const Eigen::VectorXd> word_vector(std::size_t i) const { return column(word_data_, i); }
    Eigen::Map<const Eigen::VectorXd> ngram_vector(std::size_t i) const { return column(ngram_data_, i); }
    std::optional<std::size_t> word_index(const std::string& word) const;
    std::optional<std::size_t> ngram_index(const std::string& ngram) const;

    /// Vector for `token`; nullopt when neither the word nor any n-gram is known.
    std::optional<Eigen::VectorXd> lookup(const std::string& token) const;

    /// Whole-word component of an in-vocabulary word (subword mode only).
    Eigen::Map<const Eigen::VectorXd> whole_word_vector(std::size_t i) const { return column(whole_data_, i); }

    /// Word mode: stores `v` as the word's vector.
    void add_word(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& v);
    void enable_subwords(int min_n, int max_n);
    void add_ngram(const std::string& ngram, const Eigen::Ref<const Eigen::VectorXd>& v);
    /// Subword mode: stores `whole` and the composition with already-added n-grams.
    void add_subword_word(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& whole);
    /// Subword mode: stores a pre-composed vector and recovers the whole-word part.
    void add_composed_word(const std::string& word, const Eigen::Ref<const Eigen::VectorXd>& composed);

    bool operator==(const EmbeddingTable& other) const;

private:
    Eigen::Map<const Eigen::VectorXd> column(const std::vector<double>& data, std::size_t i) const
    {
        return Eigen::Map<const Eigen::VectorXd>(data.data() + i * static_cast<std::size_t>(dim_), dim_);
    }
    std::size_t push_word(const std::string& word);
    Eigen::VectorXd ngram_sum(const std::string& word) const;

    int dim_;
    bool subword_ = false;
    int min_n_ = 3;
    int max_n_ = 6;
    std::vector<std::string> words_;
    std::unordered_map<std::string, std::size_t> word_index_;
    std::vector<double> word_data_;  ///< column-major dim x words, composed in subword mode
    std::vector<double> whole_data_; ///< subword mode only
    std::vector<std::string> ngrams_;
    std::unordered_map<std::string, std::size_t> ngram_index_;
    std::vector<double> ngram_data_;
};

/// One logistic term of the negative-sampling loss, -log sigmoid(+/- h.u).
/// Adds d/dh into `grad_h` and writes d/du into `grad_u`.
double sgns_term(const Eigen::Ref<const Eigen::VectorXd>& h, const Eigen::Ref<const Eigen::VectorXd>& u, bool positive,
                 Eigen::Ref<Eigen::VectorXd> grad_h, Eigen::Ref<Eigen::VectorXd> grad_u);

/// Full loss for one (center, context, negatives) triple with gradients.
struct SgnsGradient {
    double loss = 0.0;
    Eigen::VectorXd center;
    Eigen::VectorXd context;
    Eigen::MatrixXd negatives; ///< one column per negative
};
SgnsGradient sgns_loss_gradient(const Eigen::Ref<const Eigen::VectorXd>& center,
                                const Eigen::Ref<const Eigen::VectorXd>& context,
                                const Eigen::Ref<const Eigen::MatrixXd>& negatives);

/// Skip-gram with negative sampling. Throws DataError when no token reaches min_count.
EmbeddingTable train_sgns(std::span<const TokenSeq> sentences, const SgnsOptions& options, SgnsLog* log = nullptr);

/// Character n-gram variant of train_sgns.
EmbeddingTable train_subword_sgns(std::span<const TokenSeq> sentences, const SgnsOptions& options,
                                  SgnsLog* log = nullptr);

/// Text format: `<count> <dim>` then `<token> v1 ... v<dim>`. Subword tables
/// also write the n-gram vectors to `<path>.ngrams` in the same layout.
void save_table(const EmbeddingTable& table, const std::filesystem::path& path);
EmbeddingTable load_table(const std::filesystem::path& path);

std::filesystem::path ngram_sibling(const std::filesystem::path& path);

/// Memoizes EmbeddingTable::lookup, which composes n-grams on every call in
/// subword mode. Not thread-safe.
class CachedLookup {
public:
    explicit CachedLookup(const EmbeddingTable& table) : table_(&table) {}
    const EmbeddingTable& table() const { return *table_; }
    const std::optional<Eigen::VectorXd>& operator()(const std::string& token);

private:
    const EmbeddingTable* table_;
    std::unordered_map<std::string, std::optional<Eigen::VectorXd>> cache_;
};

/// Per-dimension max over known token vectors followed by the per-dimension
/// mean; all zeros when no token is known.
Eigen::VectorXd embed_aggregate(const TokenSeq& tokens, const EmbeddingTable& table);
Eigen::VectorXd embed_aggregate(const TokenSeq& tokens, CachedLookup& lookup);

} // namespace hostility
