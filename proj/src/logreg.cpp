#include "fixtime/learners.hpp"

#include <cmath>
#include <set>

namespace fixtime::learn {

void Dataset::validate() const {
    if (static_cast<std::size_t>(X.rows()) != y.size()) {
        throw Error("dataset: X has " + std::to_string(X.rows()) + " rows but y has " + std::to_string(y.size()));
    }
    if (y.empty()) {
        throw Error("dataset: no rows");
    }
    if (!X.allFinite()) {
        throw Error("dataset: non-finite feature value");
    }
    for (const auto label : y) {
        if (label >= n_classes) {
            throw Error("dataset: label " + std::to_string(label) + " outside [0, " + std::to_string(n_classes) +
                        ")");
        }
    }
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
    Standardizer s;
    const auto n = static_cast<double>(X.rows());
    s.mean = X.colwise().mean();
    s.scale.resize(X.cols());
    for (Eigen::Index c = 0; c < X.cols(); ++c) {
        const double var = (X.col(c).array() - s.mean(c)).square().sum() / n;
        const double sd = std::sqrt(var);
        s.scale(c) = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    if (X.cols() != mean.size()) {
        throw DimensionError("standardizer: expected " + std::to_string(mean.size()) + " features, got " +
                             std::to_string(X.cols()));
    }
    return (X.rowwise() - mean).array().rowwise() / scale.array();
}

namespace {

/// Row-wise log-softmax of the logits.
Eigen::MatrixXd log_softmax(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
        out.row(i) = logits.row(i).array() - lse;
    }
    return out;
}

}  // namespace

Objective logreg_objective(const Eigen::MatrixXd& X, std::span<const std::size_t> y, const Eigen::MatrixXd& weights,
                           const Eigen::VectorXd& bias, double l2) {
    const auto n = X.rows();
    const Eigen::MatrixXd logits = (X * weights.transpose()).rowwise() + bias.transpose();
    const Eigen::MatrixXd logp = log_softmax(logits);
    double nll = 0.0;
    Eigen::MatrixXd residual = logp.array().exp();
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto label = static_cast<Eigen::Index>(y[static_cast<std::size_t>(i)]);
        nll -= logp(i, label);
        residual(i, label) -= 1.0;
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    Objective out;
    out.loss = nll * inv_n + 0.5 * l2 * weights.squaredNorm();
    out.grad_weights = (residual.transpose() * X) * inv_n + l2 * weights;
    out.grad_bias = residual.colwise().sum().transpose() * inv_n;
    return out;
}

LogRegModel train_logreg(const Dataset& data, const LogRegConfig& config) {
    data.validate();
    if (data.n_classes < 2 || data.rows() < data.n_classes) {
        throw Error("logistic regression needs at least 2 classes and n >= C");
    }
    if (std::set<std::size_t>(data.y.begin(), data.y.end()).size() < 2) {
        throw Error("logistic regression needs at least two distinct classes in the training labels");
    }
    LogRegModel model;
    model.l2 = config.l2;
    model.seed = config.seed;
    model.standardizer = Standardizer::fit(data.X);
    const Eigen::MatrixXd Xs = model.standardizer.apply(data.X);
    const auto C = static_cast<Eigen::Index>(data.n_classes);
    model.weights = Eigen::MatrixXd::Zero(C, Xs.cols());
    model.bias = Eigen::VectorXd::Zero(C);

    for (std::size_t epoch = 0; epoch < config.max_epochs; ++epoch) {
        const Objective obj = logreg_objective(Xs, data.y, model.weights, model.bias, config.l2);
        if (!std::isfinite(obj.loss) || !obj.grad_weights.allFinite()) {
            throw DivergenceError(epoch);
        }
        if (!model.training_trace.empty() && std::abs(model.training_trace.back() - obj.loss) < config.tolerance) {
            model.training_trace.push_back(obj.loss);
            break;
        }
        model.training_trace.push_back(obj.loss);
        model.weights -= config.learning_rate * obj.grad_weights;
        model.bias -= config.learning_rate * obj.grad_bias;
    }
    if (!model.weights.allFinite() || !model.bias.allFinite()) {
        throw DivergenceError(model.training_trace.size());
    }
    return model;
}

std::vector<double> predict_proba(const LogRegModel& model, std::span<const double> x) {
    if (x.size() != model.n_features()) {
        throw DimensionError("logistic model expects " + std::to_string(model.n_features()) + " features, got " +
                             std::to_string(x.size()));
    }
    const auto C = model.weights.rows();
    std::vector<double> logits(static_cast<std::size_t>(C));
    for (Eigen::Index c = 0; c < C; ++c) {
        double z = model.bias(c);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const auto jj = static_cast<Eigen::Index>(j);
            z += model.weights(c, jj) * ((x[j] - model.standardizer.mean(jj)) / model.standardizer.scale(jj));
        }
        logits[static_cast<std::size_t>(c)] = z;
    }
    double m = logits[0];
    for (const double z : logits) {
        m = std::max(m, z);
    }
    double sum = 0.0;
    for (auto& z : logits) {
        z = std::exp(z - m);
        sum += z;
    }
    for (auto& z : logits) {
        z /= sum;
    }
    return logits;
}

}  // namespace fixtime::learn
