#include "embeval/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "embeval/error.hpp"

namespace embeval {

namespace {

// Row-stable softmax probabilities for logits (N x m).
Eigen::MatrixXd softmax_rows(const Eigen::MatrixXd& logits) {
    Eigen::MatrixXd p = logits;
    for (long long i = 0; i < p.rows(); ++i) {
        const double top = p.row(i).maxCoeff();
        p.row(i) = (p.row(i).array() - top).exp();
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

Eigen::MatrixXd standardized(const EmbeddingSet& emb, const Eigen::VectorXd& mean,
                             const Eigen::VectorXd& scale) {
    Eigen::MatrixXd z = emb.matrix.rowwise() - mean.transpose();
    z = z.array().rowwise() * scale.transpose().array();
    return z;
}

}  // namespace

double probe_loss(const Eigen::MatrixXd& inputs, const std::vector<int>& labels,
                  const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                  double l2_lambda) {
    const auto n = inputs.rows();
    Eigen::MatrixXd logits = inputs * weights.transpose();
    logits.rowwise() += bias.transpose();
    double nll = 0.0;
    for (long long i = 0; i < n; ++i) {
        const double top = logits.row(i).maxCoeff();
        const double lse = top + std::log((logits.row(i).array() - top).exp().sum());
        nll += lse - logits(i, labels[static_cast<std::size_t>(i)]);
    }
    return nll / static_cast<double>(n) + 0.5 * l2_lambda * weights.squaredNorm();
}

void probe_gradient(const Eigen::MatrixXd& inputs, const std::vector<int>& labels,
                    const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    double l2_lambda, Eigen::MatrixXd& grad_weights,
                    Eigen::VectorXd& grad_bias) {
    const auto n = inputs.rows();
    Eigen::MatrixXd logits = inputs * weights.transpose();
    logits.rowwise() += bias.transpose();
    Eigen::MatrixXd residual = softmax_rows(logits);  // N x m
    for (long long i = 0; i < n; ++i)
        residual(i, labels[static_cast<std::size_t>(i)]) -= 1.0;
    residual /= static_cast<double>(n);
    grad_weights = residual.transpose() * inputs + l2_lambda * weights;
    grad_bias = residual.colwise().sum().transpose();
}

LinearProbe train_linear_probe(const EmbeddingSet& emb, const Clustering& labels,
                               const ProbeConfig& config) {
    const auto n = emb.n();
    const int m = labels.m;
    if (labels.n() != n) throw InputError("probe: labels and embeddings disagree on N");
    if (m < 2) throw InputError("probe: needs at least 2 classes");
    if (n < m) throw InputError("probe: fewer entities than classes");
    if (config.epochs < 1) throw InputError("probe: epochs must be >= 1");
    if (!(config.learning_rate > 0.0)) throw InputError("probe: learning rate must be > 0");
    if (config.l2_lambda < 0.0) throw InputError("probe: l2 must be >= 0");

    LinearProbe probe;
    probe.config = config;
    probe.feature_mean = emb.matrix.colwise().mean().transpose();
    const Eigen::VectorXd variance = (emb.matrix.rowwise() - probe.feature_mean.transpose())
                                         .array()
                                         .square()
                                         .colwise()
                                         .mean()
                                         .transpose();
    probe.feature_scale.resize(emb.dim());
    for (long long j = 0; j < emb.dim(); ++j)
        probe.feature_scale(j) = variance(j) > 0.0 ? 1.0 / std::sqrt(variance(j)) : 0.0;

    const Eigen::MatrixXd z = standardized(emb, probe.feature_mean, probe.feature_scale);
    probe.weights = Eigen::MatrixXd::Zero(m, emb.dim());
    probe.bias = Eigen::VectorXd::Zero(m);

    Eigen::MatrixXd grad_w;
    Eigen::VectorXd grad_b;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        probe_gradient(z, labels.assignment, probe.weights, probe.bias, config.l2_lambda,
                       grad_w, grad_b);
        probe.weights -= config.learning_rate * grad_w;
        probe.bias -= config.learning_rate * grad_b;
    }
    probe.final_loss =
        probe_loss(z, labels.assignment, probe.weights, probe.bias, config.l2_lambda);
    return probe;
}

double probe_accuracy(const LinearProbe& probe, const EmbeddingSet& emb,
                      const Clustering& labels) {
    if (emb.dim() != probe.dim())
        throw InputError("probe: embedding dimension " + std::to_string(emb.dim()) +
                         " does not match probe dimension " + std::to_string(probe.dim()));
    if (labels.n() != emb.n()) throw InputError("probe: labels and embeddings disagree on N");

    const Eigen::MatrixXd z = standardized(emb, probe.feature_mean, probe.feature_scale);
    Eigen::MatrixXd logits = z * probe.weights.transpose();
    logits.rowwise() += probe.bias.transpose();

    long long correct = 0;
    for (long long i = 0; i < emb.n(); ++i) {
        int argmax = 0;
        double top = logits(i, 0);
        for (int k = 1; k < probe.classes(); ++k)
            if (logits(i, k) > top) {
                top = logits(i, k);
                argmax = k;
            }
        if (argmax == labels.assignment[static_cast<std::size_t>(i)]) ++correct;
    }
    return 100.0 * static_cast<double>(correct) / static_cast<double>(emb.n());
}

std::vector<double> average_ranks(const std::vector<double>& values) {
    const auto n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

namespace {

std::optional<std::string> zero_variance_reason(const std::vector<double>& xs,
                                                const std::vector<double>& ys) {
    const auto constant = [](const std::vector<double>& v) {
        return *std::max_element(v.begin(), v.end()) == *std::min_element(v.begin(), v.end());
    };
    const bool cx = constant(xs), cy = constant(ys);
    if (cx && cy) return "zero variance in both series";
    if (cx) return "zero variance in first series";
    if (cy) return "zero variance in second series";
    return std::nullopt;
}

double pearson_value(const std::vector<double>& xs, const std::vector<double>& ys) {
    const auto n = xs.size();
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mean_x += xs[i];
        mean_y += ys[i];
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mean_x;
        const double dy = ys[i] - mean_y;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

void check_series(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() != ys.size()) throw InputError("correlation: series lengths differ");
    if (xs.size() < 2) throw InputError("correlation: need at least 2 points");
}

}  // namespace

CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_series(xs, ys);
    CorrelationResult result;
    result.n_points = static_cast<long long>(xs.size());
    if (auto reason = zero_variance_reason(xs, ys)) {
        result.undefined_reason = reason;
        return result;
    }
    result.pearson_r = pearson_value(xs, ys);
    return result;
}

CorrelationResult spearman(const std::vector<double>& xs, const std::vector<double>& ys) {
    check_series(xs, ys);
    CorrelationResult result;
    result.n_points = static_cast<long long>(xs.size());
    if (auto reason = zero_variance_reason(xs, ys)) {
        result.undefined_reason = reason;
        return result;
    }
    result.spearman_rho = pearson_value(average_ranks(xs), average_ranks(ys));
    return result;
}

}  // namespace embeval
