#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "embeval/data.hpp"
#include "embeval/gaussian.hpp"

namespace embeval {

// Unnormalized log MAP score of one candidate binary split: the two-sided
// hard-assignment Gaussian log likelihood plus the feature's log prior. The
// normalization over candidates is shared and cancels in the argmax.
struct SplitScore {
    double log_joint = 0.0;
    int feature_index = -1;
    long long left_count = 0;   // feature value 0
    long long right_count = 0;  // feature value 1
};

struct FeaturePrior {
    std::vector<double> log_prior;  // one entry per binary feature

    static FeaturePrior uniform(std::size_t q);
};

struct TreeNode {
    bool is_leaf = true;
    int feature = -1;          // split nodes: index into the binary table
    std::string feature_name;  // "<column>==<category>"
    double normalized_score = 0.0;  // filled only when requested
    bool has_normalized_score = false;
    std::unique_ptr<TreeNode> left;   // feature value 0
    std::unique_ptr<TreeNode> right;  // feature value 1
    std::vector<int> entities;        // leaves: row indices, original order
};

struct TreeParams {
    int max_depth = 10;
    long long min_node_size = 50;
};

struct EmbeddingTree {
    std::unique_ptr<TreeNode> root;
    TreeParams stopping;
    std::string reg_desc;
    std::vector<std::string> ids;  // entity ids the tree was built over
};

// Smallest admissible side for a candidate split. Covariance MLE needs d+1
// points unless the regularization floor is substantial.
long long min_split_side(const TreeParams& params, long long dim, RegularizationMode reg);

std::optional<SplitScore> split_score(const Eigen::MatrixXd& points,
                                      const std::vector<std::uint8_t>& feature_column,
                                      RegularizationMode reg, double log_prior,
                                      long long min_side);

// Scores every feature and returns the admissible one with the largest
// log_joint; the first index wins ties (strict > comparison).
std::optional<SplitScore> best_split(const Eigen::MatrixXd& points,
                                     const std::vector<std::vector<std::uint8_t>>& columns,
                                     RegularizationMode reg, const FeaturePrior& prior,
                                     long long min_side, int threads = 1,
                                     std::vector<double>* all_log_joints = nullptr);

EmbeddingTree build_tree(const EmbeddingSet& emb, const FeatureTable& feats,
                         const TreeParams& params, RegularizationMode reg,
                         const std::optional<FeaturePrior>& prior = std::nullopt,
                         bool report_normalized = false, int threads = 1);

// Leaves in pre-order (left first) become clusters; labels spell out the
// root-to-leaf sequence of yes/no answers.
Clustering leaf_clustering(const EmbeddingTree& tree);

std::string tree_to_json(const EmbeddingTree& tree);

void write_tree_json(const EmbeddingTree& tree, const std::string& path);

// Reads a tree file and derives the clustering restricted to the embedding
// set's ids; every embedding id must appear in some leaf.
Clustering clustering_from_tree_file(const std::string& path, const EmbeddingSet& emb);

}  // namespace embeval
