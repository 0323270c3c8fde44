#include "fixtime/textproc.hpp"

#include "fixtime/random.hpp"
#include "json_util.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SVD>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace fixtime::text {

using nlohmann::json;

namespace {

constexpr const char* kBundledStopwords =
#include "stopwords_en.inc"
    ;

StopwordSet parse_stopwords(std::istream& in) {
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto last = line.find_last_not_of(" \t\r");
        std::string word = line.substr(first, last - first + 1);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        out.insert(std::move(word));
    }
    return out;
}

bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

/// Blanks out `<tag ...>` spans and `&name;` / `&#123;` entities.
std::string strip_markup(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c == '<' && i + 1 < s.size() && (is_alpha(s[i + 1]) || s[i + 1] == '/' || s[i + 1] == '!')) {
            const auto close = s.find('>', i + 1);
            if (close != std::string_view::npos) {
                out.push_back(' ');
                i = close;
                continue;
            }
        }
        if (c == '&') {
            std::size_t j = i + 1;
            if (j < s.size() && s[j] == '#') {
                ++j;
            }
            const std::size_t body = j;
            while (j < s.size() && std::isalnum(static_cast<unsigned char>(s[j]))) {
                ++j;
            }
            if (j > body && j < s.size() && s[j] == ';') {
                out.push_back(' ');
                i = j;
                continue;
            }
        }
        out.push_back(c);
    }
    return out;
}

Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    return qr.householderQ() * Eigen::MatrixXd::Identity(y.rows(), y.cols());
}

}  // namespace

const StopwordSet& default_stopwords() {
    static const StopwordSet words = [] {
        std::istringstream in(kBundledStopwords);
        return parse_stopwords(in);
    }();
    return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open stopword file '" + path.string() + "'");
    }
    return parse_stopwords(in);
}

TokenizedDoc clean_text(std::string_view summary, std::string_view description, const StopwordSet& stopwords,
                        std::string issue_key) {
    std::string joined;
    joined.reserve(summary.size() + description.size() + 1);
    joined.append(summary);
    joined.push_back(' ');
    joined.append(description);
    std::string text = strip_markup(joined);
    for (auto& c : text) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        } else if (c < 'a' || c > 'z') {
            c = ' ';
        }
    }

    TokenizedDoc doc;
    doc.issue_key = std::move(issue_key);
    std::istringstream words(text);
    std::string word;
    while (words >> word) {
        if (stopwords.contains(word)) {
            continue;
        }
        std::string s = stem(word);
        if (s.empty() || stopwords.contains(s)) {
            continue;
        }
        doc.tokens.push_back(std::move(s));
    }
    return doc;
}

double norm(const SparseVector& v) {
    double s = 0.0;
    for (const double x : v.values) {
        s += x * x;
    }
    return std::sqrt(s);
}

double cosine(const SparseVector& a, const SparseVector& b) {
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    double dot = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.indices.size() && j < b.indices.size()) {
        if (a.indices[i] == b.indices[j]) {
            dot += a.values[i++] * b.values[j++];
        } else if (a.indices[i] < b.indices[j]) {
            ++i;
        } else {
            ++j;
        }
    }
    return dot / (na * nb);
}

std::int64_t Vectorizer::column(const std::string& token) const {
    const auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
}

void Vectorizer::reindex() {
    index_.clear();
    for (std::uint32_t i = 0; i < terms.size(); ++i) {
        index_.emplace(terms[i], i);
    }
}

Vectorizer fit_vectorizer(std::span<const TokenizedDoc> docs, std::size_t min_df, std::size_t max_vocab) {
    std::map<std::string, std::size_t> df;
    bool any_nonempty = false;
    for (const auto& doc : docs) {
        std::set<std::string_view> unique(doc.tokens.begin(), doc.tokens.end());
        any_nonempty = any_nonempty || !unique.empty();
        for (const auto t : unique) {
            ++df[std::string(t)];
        }
    }
    if (!any_nonempty) {
        throw VocabularyEmpty("no document has any token");
    }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [token, count] : df) {
        if (count >= min_df) {
            kept.emplace_back(token, count);
        }
    }
    std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    if (kept.size() > max_vocab) {
        kept.resize(max_vocab);
    }
    if (kept.empty()) {
        throw VocabularyEmpty("no token reaches min_df=" + std::to_string(min_df));
    }

    Vectorizer v;
    v.min_df = min_df;
    v.max_vocab = max_vocab;
    v.n_docs = docs.size();
    const double n = static_cast<double>(docs.size());
    for (auto& [token, count] : kept) {
        v.terms.push_back(token);
        v.idf.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
    }
    v.reindex();
    return v;
}

SparseVector vectorize(const TokenizedDoc& doc, const Vectorizer& v) {
    std::map<std::uint32_t, double> tf;
    for (const auto& t : doc.tokens) {
        const auto col = v.column(t);
        if (col >= 0) {
            tf[static_cast<std::uint32_t>(col)] += 1.0;
        }
    }
    SparseVector out;
    double sq = 0.0;
    for (const auto& [col, count] : tf) {
        const double w = count * v.idf[col];
        out.indices.push_back(col);
        out.values.push_back(w);
        sq += w * w;
    }
    if (sq > 0.0) {
        const double inv = 1.0 / std::sqrt(sq);
        for (auto& w : out.values) {
            w *= inv;
        }
    }
    return out;
}

std::vector<double> LsaModel::transform(const SparseVector& row) const {
    std::vector<double> out(dim(), 0.0);
    for (std::size_t i = 0; i < row.indices.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(row.indices[i]);
        if (r >= components.rows()) {
            throw DimensionError("sparse row index beyond the fitted vocabulary");
        }
        const double w = row.values[i];
        for (std::size_t k = 0; k < out.size(); ++k) {
            out[k] += w * components(r, static_cast<Eigen::Index>(k));
        }
    }
    return out;
}

LsaFit reduce_dimensionality(std::span<const SparseVector> rows, std::size_t vocab_size, std::size_t d,
                             std::uint64_t seed) {
    const std::size_t n = rows.size();
    const std::size_t min_dim = std::min(n, vocab_size);
    if (d == 0 || d > min_dim) {
        throw DimensionError("target dimension " + std::to_string(d) + " outside [1, " + std::to_string(min_dim) +
                             "]");
    }
    using Sparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;
    std::vector<Eigen::Triplet<double>> triplets;
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t i = 0; i < rows[r].indices.size(); ++i) {
            if (rows[r].indices[i] >= vocab_size) {
                throw DimensionError("sparse row index beyond vocabulary size");
            }
            if (rows[r].values[i] != 0.0) {
                triplets.emplace_back(static_cast<int>(r), static_cast<int>(rows[r].indices[i]), rows[r].values[i]);
            }
        }
    }
    if (triplets.empty()) {
        throw DimensionError("cannot reduce an all-zero matrix");
    }
    Sparse a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(vocab_size));
    a.setFromTriplets(triplets.begin(), triplets.end());
    const Eigen::SparseMatrix<double, Eigen::RowMajor> at = a.transpose();

    const auto sketch = static_cast<Eigen::Index>(std::min(d + 10, min_dim));
    Rng rng(seed);
    Eigen::MatrixXd omega(static_cast<Eigen::Index>(vocab_size), sketch);
    for (Eigen::Index c = 0; c < omega.cols(); ++c) {
        for (Eigen::Index r = 0; r < omega.rows(); ++r) {
            omega(r, c) = rng.normal();
        }
    }

    // Subspace iteration until the leading d Ritz values settle.
    Eigen::MatrixXd q = orthonormalize(a * omega);
    Eigen::VectorXd previous;
    constexpr int kMaxIterations = 100;
    for (int it = 0; it < kMaxIterations; ++it) {
        const Eigen::MatrixXd bt = at * q;
        const Eigen::MatrixXd gram = bt.transpose() * bt;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd lead = eig.eigenvalues().reverse().head(static_cast<Eigen::Index>(d));
        if (it > 0) {
            const double scale = std::max(lead(0), 1e-300);
            if ((lead - previous).cwiseAbs().maxCoeff() <= 1e-12 * scale) {
                break;
            }
        }
        previous = lead;
        q = orthonormalize(a * orthonormalize(bt));
    }

    const Eigen::MatrixXd bt = at * q;  // vocab x sketch
    Eigen::JacobiSVD<Eigen::MatrixXd, Eigen::ColPivHouseholderQRPreconditioner> svd(bt, Eigen::ComputeThinU);

    LsaFit fit;
    fit.model.seed = seed;
    fit.model.components = svd.matrixU().leftCols(static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < fit.model.components.cols(); ++k) {
        Eigen::Index arg = 0;
        fit.model.components.col(k).cwiseAbs().maxCoeff(&arg);
        if (fit.model.components(arg, k) < 0.0) {
            fit.model.components.col(k) *= -1.0;
        }
        fit.model.singular_values.push_back(svd.singularValues()(k));
    }

    fit.projection.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (std::size_t r = 0; r < n; ++r) {
        const auto v = fit.model.transform(rows[r]);
        for (std::size_t k = 0; k < d; ++k) {
            fit.projection(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = v[k];
        }
    }
    return fit;
}

std::map<std::string, std::vector<double>> load_embeddings(const std::filesystem::path& path,
                                                           const std::set<std::string>& keys) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open embedding file '" + path.string() + "'");
    }
    std::map<std::string, std::vector<double>> all;
    std::optional<std::size_t> dim;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r\n") == std::string::npos) {
            continue;
        }
        const std::string where = "embedding file line " + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw FormatError(where + ": malformed JSON");
        }
        if (!j.is_object() || !j.contains("key") || !j["key"].is_string() || !j.contains("vector") ||
            !j["vector"].is_array()) {
            throw FormatError(where + ": expected {\"key\": str, \"vector\": [float]}");
        }
        std::vector<double> v;
        for (const auto& x : j["vector"]) {
            if (!x.is_number() || !std::isfinite(x.get<double>())) {
                throw FormatError(where + ": vector entries must be finite numbers");
            }
            v.push_back(x.get<double>());
        }
        if (v.empty()) {
            throw FormatError(where + ": empty vector");
        }
        if (dim && *dim != v.size()) {
            throw FormatError(where + ": dimension " + std::to_string(v.size()) + " differs from " +
                              std::to_string(*dim));
        }
        dim = v.size();
        if (!all.emplace(j["key"].get<std::string>(), std::move(v)).second) {
            throw FormatError(where + ": duplicate key");
        }
    }
    std::map<std::string, std::vector<double>> out;
    for (const auto& key : keys) {
        auto it = all.find(key);
        if (it == all.end()) {
            throw MissingEmbedding(key);
        }
        out.emplace(key, std::move(it->second));
    }
    return out;
}

void to_json(json& j, const Vectorizer& v) {
    j = json{{"terms", v.terms}, {"idf", v.idf}, {"min_df", v.min_df}, {"max_vocab", v.max_vocab},
             {"n_docs", v.n_docs}};
}

void from_json(const json& j, Vectorizer& v) {
    v.terms = j.at("terms").get<std::vector<std::string>>();
    v.idf = j.at("idf").get<std::vector<double>>();
    v.min_df = j.at("min_df").get<std::size_t>();
    v.max_vocab = j.at("max_vocab").get<std::size_t>();
    v.n_docs = j.at("n_docs").get<std::size_t>();
    if (v.terms.size() != v.idf.size()) {
        throw FormatError("vectorizer: terms/idf length mismatch");
    }
    v.reindex();
}

void to_json(json& j, const LsaModel& m) {
    j = json{{"components", detail::matrix_to_json(m.components)},
             {"singular_values", m.singular_values},
             {"seed", m.seed}};
}

void from_json(const json& j, LsaModel& m) {
    m.components = detail::matrix_from_json(j.at("components"));
    m.singular_values = j.at("singular_values").get<std::vector<double>>();
    m.seed = j.at("seed").get<std::uint64_t>();
}

void to_json(json& j, const EmbeddingSource& s) {
    if (s.kind == EmbeddingSource::Kind::BuiltinTfidfLsa) {
        j = json{{"source", "builtin"}, {"dimension", s.dimension}};
    } else {
        j = json{{"source", "precomputed"}, {"path", s.path}};
    }
}

void from_json(const json& j, EmbeddingSource& s) {
    detail::check_keys(j, {"source", "dimension", "path"}, "text.embeddings");
    const auto source = j.value("source", std::string("builtin"));
    if (source == "builtin") {
        s.kind = EmbeddingSource::Kind::BuiltinTfidfLsa;
        detail::read_optional(j, "dimension", s.dimension);
        if (s.dimension == 0) {
            throw ConfigError("text.embeddings.dimension must be >= 1");
        }
    } else if (source == "precomputed") {
        s.kind = EmbeddingSource::Kind::PrecomputedFile;
        s.path = j.value("path", std::string());
        if (s.path.empty()) {
            throw ConfigError("text.embeddings.path is required for precomputed embeddings");
        }
    } else {
        throw ConfigError("text.embeddings.source must be 'builtin' or 'precomputed'");
    }
}

}  // namespace fixtime::text
