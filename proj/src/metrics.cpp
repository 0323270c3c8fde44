#include "fixtime/learners.hpp"

namespace fixtime::learn {

ClassificationMetrics metrics(std::span<const std::size_t> y_true, std::span<const std::size_t> y_pred,
                              std::size_t n_classes) {
    if (y_true.size() != y_pred.size() || y_true.empty()) {
        throw Error("metrics: label sequences must be nonempty and of equal length");
    }
    std::vector<std::vector<std::size_t>> confusion(n_classes, std::vector<std::size_t>(n_classes, 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        if (y_true[i] >= n_classes || y_pred[i] >= n_classes) {
            throw Error("metrics: class index out of range");
        }
        ++confusion[y_true[i]][y_pred[i]];
    }
    return metrics_from_confusion(confusion);
}

ClassificationMetrics metrics_from_confusion(const std::vector<std::vector<std::size_t>>& confusion) {
    const std::size_t C = confusion.size();
    ClassificationMetrics out;
    out.confusion = confusion;
    out.per_class.resize(C);
    std::vector<std::size_t> predicted(C, 0);
    std::size_t total = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < C; ++i) {
        if (confusion[i].size() != C) {
            throw Error("metrics: confusion matrix must be square");
        }
        for (std::size_t j = 0; j < C; ++j) {
            predicted[j] += confusion[i][j];
            out.per_class[i].support += confusion[i][j];
            total += confusion[i][j];
        }
        correct += confusion[i][i];
    }
    if (total == 0) {
        throw Error("metrics: empty confusion matrix");
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    double macro = 0.0;
    std::size_t present = 0;
    for (std::size_t c = 0; c < C; ++c) {
        auto& m = out.per_class[c];
        const auto tp = static_cast<double>(confusion[c][c]);
        m.precision = predicted[c] > 0 ? tp / static_cast<double>(predicted[c]) : 0.0;
        m.recall = m.support > 0 ? tp / static_cast<double>(m.support) : 0.0;
        m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
        if (m.support > 0 || predicted[c] > 0) {
            macro += m.f1;
            ++present;
        }
        out.f1_weighted += m.f1 * static_cast<double>(m.support);
    }
    out.f1_macro = present > 0 ? macro / static_cast<double>(present) : 0.0;
    out.f1_weighted /= static_cast<double>(total);
    return out;
}

void to_json(nlohmann::json& j, const ClassificationMetrics& m) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& c : m.per_class) {
        per_class.push_back({{"precision", c.precision}, {"recall", c.recall}, {"f1", c.f1}, {"support", c.support}});
    }
    j = nlohmann::json{{"accuracy", m.accuracy},
                       {"f1_macro", m.f1_macro},
                       {"f1_weighted", m.f1_weighted},
                       {"confusion", m.confusion},
                       {"per_class", per_class}};
}

}  // namespace fixtime::learn
