#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embeval/data.hpp"

namespace embeval {

struct ProbeConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    double l2_lambda = 1e-4;
    std::uint64_t seed = 0;
};

// Multinomial logistic regression trained by full-batch gradient descent
// from zero-initialized parameters. Inputs are standardized per dimension;
// the transform is stored so evaluation applies the same scaling.
struct LinearProbe {
    Eigen::MatrixXd weights;  // m x d
    Eigen::VectorXd bias;     // m
    ProbeConfig config;
    double final_loss = 0.0;
    Eigen::VectorXd feature_mean;   // d
    Eigen::VectorXd feature_scale;  // d; 0 for constant dimensions

    int classes() const { return static_cast<int>(weights.rows()); }
    long long dim() const { return weights.cols(); }
};

struct CorrelationResult {
    std::optional<double> pearson_r;
    std::optional<double> spearman_rho;
    long long n_points = 0;
    std::optional<std::string> undefined_reason;
};

// Softmax cross-entropy with an L2 penalty on the weights (bias excluded):
// loss = -(1/N) sum_i log p_i[y_i] + (l2/2) ||W||_F^2.
double probe_loss(const Eigen::MatrixXd& inputs, const std::vector<int>& labels,
                  const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                  double l2_lambda);

void probe_gradient(const Eigen::MatrixXd& inputs, const std::vector<int>& labels,
                    const Eigen::MatrixXd& weights, const Eigen::VectorXd& bias,
                    double l2_lambda, Eigen::MatrixXd& grad_weights,
                    Eigen::VectorXd& grad_bias);

LinearProbe train_linear_probe(const EmbeddingSet& emb, const Clustering& labels,
                               const ProbeConfig& config);

// Percent of entities with argmax(Wx+b) equal to the label; ties go to the
// lowest class index.
double probe_accuracy(const LinearProbe& probe, const EmbeddingSet& emb,
                      const Clustering& labels);

CorrelationResult pearson(const std::vector<double>& xs, const std::vector<double>& ys);

// Pearson correlation of the rank-transformed series; ties receive average ranks.
CorrelationResult spearman(const std::vector<double>& xs, const std::vector<double>& ys);

std::vector<double> average_ranks(const std::vector<double>& values);

}  // namespace embeval
