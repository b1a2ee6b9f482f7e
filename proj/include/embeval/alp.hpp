#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "embeval/data.hpp"
#include "embeval/gaussian.hpp"

namespace embeval {

// One Gaussian per cluster, weight n_k/N, fit on `dims` of the embedding.
struct ClusterModel {
    std::vector<GaussianComponent> components;
    std::vector<int> dims;  // ascending subset of 0..d-1
    RegularizationMode reg;
    std::string source;

    int m() const { return static_cast<int>(components.size()); }
    int v() const { return static_cast<int>(dims.size()); }
};

struct PerClusterStats {
    int cluster = 0;
    std::string label;
    long long n = 0;
    long long n_clipped = 0;
    double mean_log_posterior = 0.0;  // over retained entities; NaN if none
    double accuracy = 0.0;            // percent, over all n
};

struct ALPReport {
    double alp = 0.0;       // mean log posterior over retained entities (<= 0)
    double accuracy = 0.0;  // percent of entities whose argmax matches, over ALL entities
    long long n_total = 0;
    long long n_clipped = 0;
    std::string clip_threshold_desc;
    std::vector<PerClusterStats> per_cluster;
};

struct HeadReport {
    std::vector<int> dims;
    ALPReport report;
};

struct MeanALPReport {
    std::vector<HeadReport> head_reports;
    double mean_alp = 0.0;
    double mean_accuracy = 0.0;
    int v = 0;
    int n_heads = 0;
    std::uint64_t seed = 0;
    bool partition = false;
};

// The four cross-embedding scores of a criterion/embedding product.
// Subscript = splitting criterion, superscript = embedding scored; only
// same-criterion pairs are comparable.
struct ComparisonReport {
    ALPReport report_aa, report_ab, report_ba, report_bb;
    double alp_aa = 0.0, alp_ab = 0.0, alp_ba = 0.0, alp_bb = 0.0;
};

ClusterModel fit_cluster_model(const EmbeddingSet& emb, const Clustering& clustering,
                               RegularizationMode reg,
                               const std::optional<std::vector<int>>& dims = std::nullopt,
                               int threads = 1);

// Posterior over clusters for one point (full-dimension input; the model
// selects its own dims). Log-space softmax with max subtraction.
Eigen::VectorXd posterior(const ClusterModel& model, const Eigen::VectorXd& x);

Eigen::VectorXd log_posterior(const ClusterModel& model, const Eigen::VectorXd& x);

// An entity in cluster k is excluded from the ALP average (clipped) when its
// posterior falls below w_k * clip_eps; accuracy still counts every entity.
ALPReport alp_score(const ClusterModel& model, const EmbeddingSet& emb,
                    const Clustering& clustering, double clip_eps, int threads = 1);

// Each head fits and scores the model on v dimensions drawn without
// replacement from a stream keyed by (seed, head); with partition=true the
// heads are disjoint consecutive blocks of one seeded shuffle.
MeanALPReport mean_alp_multihead(const EmbeddingSet& emb, const Clustering& clustering,
                                 RegularizationMode reg, int v, int n_heads,
                                 std::uint64_t seed, double clip_eps, bool partition = false,
                                 int threads = 1);

ComparisonReport compare_embeddings(const EmbeddingSet& emb_a, const EmbeddingSet& emb_b,
                                    const Clustering& clust_a, const Clustering& clust_b,
                                    RegularizationMode reg, double clip_eps, int threads = 1);

}  // namespace embeval
