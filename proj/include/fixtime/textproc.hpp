#pragma once

#include "fixtime/error.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace fixtime::text {

/// Porter (1980) suffix stripper, single pass, lowercase ASCII input.
[[nodiscard]] std::string porter_stem(std::string_view word);

/// porter_stem iterated to a fixed point, so stem(stem(w)) == stem(w).
[[nodiscard]] std::string stem(std::string_view word);

using StopwordSet = std::set<std::string>;

/// The bundled English stopword list (data/stopwords_en.txt).
[[nodiscard]] const StopwordSet& default_stopwords();
/// One token per line; blank lines and lines starting with '#' are ignored.
[[nodiscard]] StopwordSet load_stopwords(const std::filesystem::path& path);

struct TokenizedDoc {
    std::string issue_key;
    std::vector<std::string> tokens;
};

/// Concatenates both fields, strips HTML tags/entities and non-letters,
/// lowercases, drops stopwords and stems. Stems that are themselves
/// stopwords are dropped too.
[[nodiscard]] TokenizedDoc clean_text(std::string_view summary, std::string_view description,
                                      const StopwordSet& stopwords, std::string issue_key = {});

/// Sorted-index sparse vector.
struct SparseVector {
    std::vector<std::uint32_t> indices;
    std::vector<double> values;

    [[nodiscard]] bool empty() const noexcept { return indices.empty(); }
};

[[nodiscard]] double norm(const SparseVector& v);
[[nodiscard]] double cosine(const SparseVector& a, const SparseVector& b);

struct Vectorizer {
    std::vector<std::string> terms;  // column index -> token
    std::vector<double> idf;
    std::size_t min_df = 2;
    std::size_t max_vocab = 20000;
    std::size_t n_docs = 0;

    [[nodiscard]] std::size_t size() const noexcept { return terms.size(); }
    /// Column of `token`, or -1.
    [[nodiscard]] std::int64_t column(const std::string& token) const;
    /// Rebuilds the token lookup after deserialization.
    void reindex();

  private:
    std::unordered_map<std::string, std::uint32_t> index_;
};

/// Vocabulary = tokens with df >= min_df, the max_vocab highest-df kept
/// (ties broken toward the lexicographically smaller token);
/// idf(t) = ln((1 + N) / (1 + df(t))) + 1. Throws VocabularyEmpty.
[[nodiscard]] Vectorizer fit_vectorizer(std::span<const TokenizedDoc> docs, std::size_t min_df,
                                        std::size_t max_vocab);

/// tf * idf, L2-normalized; unknown tokens are ignored.
[[nodiscard]] SparseVector vectorize(const TokenizedDoc& doc, const Vectorizer& v);

/// Truncated-SVD projection of TF-IDF rows ("LSA").
struct LsaModel {
    Eigen::MatrixXd components;  // vocab x d, orthonormal columns
    std::vector<double> singular_values;
    std::uint64_t seed = 0;

    [[nodiscard]] std::size_t dim() const noexcept { return static_cast<std::size_t>(components.cols()); }
    [[nodiscard]] std::vector<double> transform(const SparseVector& row) const;
};

struct LsaFit {
    LsaModel model;
    Eigen::MatrixXd projection;  // n x d
};

/// Seeded randomized subspace iteration. Throws DimensionError unless
/// 1 <= d <= min(rows, cols) and the matrix has a nonzero entry.
[[nodiscard]] LsaFit reduce_dimensionality(std::span<const SparseVector> rows, std::size_t vocab_size, std::size_t d,
                                           std::uint64_t seed);

struct DocVector {
    std::string issue_key;
    std::vector<double> values;
};

struct EmbeddingSource {
    enum class Kind { BuiltinTfidfLsa, PrecomputedFile };
    Kind kind = Kind::BuiltinTfidfLsa;
    std::size_t dimension = 100;  // target d for the builtin variant
    std::string path;             // precomputed file
};

/// JSONL `{"key": str, "vector": [float]}` rows. Throws MissingEmbedding for
/// an absent corpus key and FormatError on ragged or malformed rows.
[[nodiscard]] std::map<std::string, std::vector<double>> load_embeddings(const std::filesystem::path& path,
                                                                         const std::set<std::string>& keys);

void to_json(nlohmann::json& j, const Vectorizer& v);
void from_json(const nlohmann::json& j, Vectorizer& v);
void to_json(nlohmann::json& j, const LsaModel& m);
void from_json(const nlohmann::json& j, LsaModel& m);
void to_json(nlohmann::json& j, const EmbeddingSource& s);
void from_json(const nlohmann::json& j, EmbeddingSource& s);

}  // namespace fixtime::text
