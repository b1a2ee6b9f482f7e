#include "embeval/tree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "embeval/error.hpp"
#include "embeval/parallel.hpp"

namespace embeval {

namespace {

using ordered_json = nlohmann::ordered_json;

Eigen::MatrixXd gather_rows(const Eigen::MatrixXd& matrix, const std::vector<int>& rows) {
    Eigen::MatrixXd out(static_cast<long long>(rows.size()), matrix.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<long long>(i)) = matrix.row(rows[i]);
    return out;
}

double side_log_likelihood(const Eigen::MatrixXd& points, double log_weight,
                           RegularizationMode reg) {
    auto [mean, cov] = fit_mle(points);
    const GaussianComponent comp = make_component(std::move(mean), cov, log_weight, reg);
    const Eigen::VectorXd dens = log_density_batch(comp, points.transpose());
    return dens.sum() + static_cast<double>(points.rows()) * log_weight;
}

struct Builder {
    const EmbeddingSet& emb;
    const BinaryFeatureTable& bin;
    const TreeParams& params;
    RegularizationMode reg;
    const FeaturePrior& prior;
    long long min_side;
    bool report_normalized;
    int threads;

    std::unique_ptr<TreeNode> build(std::vector<int> entities, int depth) {
        auto node = std::make_unique<TreeNode>();
        if (depth >= params.max_depth ||
            static_cast<long long>(entities.size()) < 2 * params.min_node_size) {
            node->entities = std::move(entities);
            return node;
        }

        const Eigen::MatrixXd points = gather_rows(emb.matrix, entities);
        std::vector<std::vector<std::uint8_t>> columns(bin.columns.size());
        for (std::size_t f = 0; f < bin.columns.size(); ++f) {
            auto& col = columns[f];
            col.resize(entities.size());
            for (std::size_t i = 0; i < entities.size(); ++i)
                col[i] = bin.columns[f].values[static_cast<std::size_t>(entities[i])];
        }

        std::vector<double> all_scores;
        const auto best = best_split(points, columns, reg, prior, min_side, threads,
                                     report_normalized ? &all_scores : nullptr);
        if (!best.has_value()) {
            node->entities = std::move(entities);
            return node;
        }

        node->is_leaf = false;
        node->feature = best->feature_index;
        node->feature_name = bin.columns[static_cast<std::size_t>(best->feature_index)].name;
        if (report_normalized) {
            // log-sum-exp over the admissible candidates' log joints
            double top = -std::numeric_limits<double>::infinity();
            for (const double s : all_scores) top = std::max(top, s);
            double sum = 0.0;
            for (const double s : all_scores)
                if (std::isfinite(s)) sum += std::exp(s - top);
            node->normalized_score = best->log_joint - (top + std::log(sum));
            node->has_normalized_score = true;
        }

        std::vector<int> left_rows, right_rows;
        const auto& col = columns[static_cast<std::size_t>(best->feature_index)];
        for (std::size_t i = 0; i < entities.size(); ++i)
            (col[i] == 0 ? left_rows : right_rows).push_back(entities[i]);

        node->left = build(std::move(left_rows), depth + 1);
        node->right = build(std::move(right_rows), depth + 1);
        return node;
    }
};

void collect_leaves(const TreeNode* node, const std::string& path,
                    std::vector<std::pair<const TreeNode*, std::string>>& leaves) {
    if (node->is_leaf) {
        leaves.emplace_back(node, path.empty() ? "root" : path);
        return;
    }
    const std::string prefix = path.empty() ? "" : path + "/";
    collect_leaves(node->left.get(), prefix + node->feature_name + "=0", leaves);
    collect_leaves(node->right.get(), prefix + node->feature_name + "=1", leaves);
}

ordered_json node_to_json(const TreeNode* node, const std::vector<std::string>& ids) {
    ordered_json j;
    if (node->is_leaf) {
        j["type"] = "leaf";
        auto entities = ordered_json::array();
        for (const int e : node->entities) entities.push_back(ids[static_cast<std::size_t>(e)]);
        j["entities"] = std::move(entities);
        return j;
    }
    j["type"] = "split";
    j["feature"] = node->feature_name;
    if (node->has_normalized_score) j["normalized_score"] = node->normalized_score;
    j["left"] = node_to_json(node->left.get(), ids);
    j["right"] = node_to_json(node->right.get(), ids);
    return j;
}

}  // namespace

FeaturePrior FeaturePrior::uniform(std::size_t q) {
    FeaturePrior prior;
    prior.log_prior.assign(q, q > 0 ? -std::log(static_cast<double>(q)) : 0.0);
    return prior;
}

long long min_split_side(const TreeParams& params, long long dim, RegularizationMode reg) {
    const bool weak_floor = reg.kind == RegKind::AutoEpsilon ||
                            (reg.kind == RegKind::Tikhonov && reg.lambda < 1e-6);
    if (weak_floor) return std::max(params.min_node_size, dim + 1);
    return params.min_node_size;
}

std::optional<SplitScore> split_score(const Eigen::MatrixXd& points,
                                      const std::vector<std::uint8_t>& feature_column,
                                      RegularizationMode reg, double log_prior,
                                      long long min_side) {
    const auto n = points.rows();
    if (static_cast<std::size_t>(n) != feature_column.size())
        throw InputError("split_score: feature column length mismatch");

    long long left = 0;
    for (const auto bit : feature_column) left += bit == 0 ? 1 : 0;
    const long long right = n - left;
    if (left < min_side || right < min_side) return std::nullopt;

    Eigen::MatrixXd left_pts(left, points.cols()), right_pts(right, points.cols());
    long long li = 0, ri = 0;
    for (long long i = 0; i < n; ++i) {
        if (feature_column[static_cast<std::size_t>(i)] == 0)
            left_pts.row(li++) = points.row(i);
        else
            right_pts.row(ri++) = points.row(i);
    }

    const double w_left = std::log(static_cast<double>(left) / static_cast<double>(n));
    const double w_right = std::log(static_cast<double>(right) / static_cast<double>(n));
    SplitScore score;
    score.left_count = left;
    score.right_count = right;
    score.log_joint = side_log_likelihood(left_pts, w_left, reg) +
                      side_log_likelihood(right_pts, w_right, reg) + log_prior;
    return score;
}

std::optional<SplitScore> best_split(const Eigen::MatrixXd& points,
                                     const std::vector<std::vector<std::uint8_t>>& columns,
                                     RegularizationMode reg, const FeaturePrior& prior,
                                     long long min_side, int threads,
                                     std::vector<double>* all_log_joints) {
    const auto q = columns.size();
    if (prior.log_prior.size() != q)
        throw InputError("best_split: prior has " + std::to_string(prior.log_prior.size()) +
                         " entries for " + std::to_string(q) + " features");

    std::vector<std::optional<SplitScore>> scores(q);
    par::for_each_task(q, threads, [&](std::size_t f) {
        scores[f] = split_score(points, columns[f], reg, prior.log_prior[f], min_side);
        if (scores[f].has_value()) scores[f]->feature_index = static_cast<int>(f);
    });

    if (all_log_joints) {
        all_log_joints->assign(q, -std::numeric_limits<double>::infinity());
        for (std::size_t f = 0; f < q; ++f)
            if (scores[f].has_value()) (*all_log_joints)[f] = scores[f]->log_joint;
    }

    std::optional<SplitScore> best;
    for (std::size_t f = 0; f < q; ++f) {
        if (!scores[f].has_value()) continue;
        if (!best.has_value() || scores[f]->log_joint > best->log_joint) best = scores[f];
    }
    return best;
}

EmbeddingTree build_tree(const EmbeddingSet& emb, const FeatureTable& feats,
                         const TreeParams& params, RegularizationMode reg,
                         const std::optional<FeaturePrior>& prior, bool report_normalized,
                         int threads) {
    if (emb.ids != feats.ids)
        throw InputError("build_tree: embeddings and features must be aligned first");
    if (params.max_depth < 0) throw InputError("build_tree: max_depth must be >= 0");
    if (params.min_node_size < 1) throw InputError("build_tree: min_node_size must be >= 1");

    const BinaryFeatureTable bin = binarize(feats);
    const FeaturePrior use_prior =
        prior.has_value() ? *prior : FeaturePrior::uniform(static_cast<std::size_t>(bin.q()));
    if (use_prior.log_prior.size() != static_cast<std::size_t>(bin.q()))
        throw InputError("build_tree: prior size does not match binary feature count");

    EmbeddingTree tree;
    tree.stopping = params;
    tree.reg_desc = reg.describe();
    tree.ids = emb.ids;

    std::vector<int> everything(static_cast<std::size_t>(emb.n()));
    for (long long i = 0; i < emb.n(); ++i) everything[static_cast<std::size_t>(i)] =
        static_cast<int>(i);

    Builder builder{emb,      bin,
                    params,   reg,
                    use_prior, min_split_side(params, emb.dim(), reg),
                    report_normalized, threads};
    tree.root = builder.build(std::move(everything), 0);
    return tree;
}

Clustering leaf_clustering(const EmbeddingTree& tree) {
    std::vector<std::pair<const TreeNode*, std::string>> leaves;
    collect_leaves(tree.root.get(), "", leaves);

    Clustering clustering;
    clustering.m = static_cast<int>(leaves.size());
    clustering.criterion = "tree(max_depth=" + std::to_string(tree.stopping.max_depth) +
                           ",min_node_size=" + std::to_string(tree.stopping.min_node_size) + ")";
    clustering.assignment.assign(tree.ids.size(), -1);
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        clustering.labels.push_back(leaves[k].second);
        for (const int e : leaves[k].first->entities)
            clustering.assignment[static_cast<std::size_t>(e)] = static_cast<int>(k);
    }
    validate_clustering(clustering);
    return clustering;
}

std::string tree_to_json(const EmbeddingTree& tree) {
    ordered_json j;
    j["schema_version"] = 1;
    j["stopping"] = {{"max_depth", tree.stopping.max_depth},
                     {"min_node_size", tree.stopping.min_node_size}};
    j["reg"] = tree.reg_desc;
    j["root"] = node_to_json(tree.root.get(), tree.ids);
    return j.dump(2) + "\n";
}

void write_tree_json(const EmbeddingTree& tree, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot open for writing");
    out << tree_to_json(tree);
    if (!out) throw InputError(path + ": write failed");
}

namespace {

void collect_file_leaves(const ordered_json& node, const std::string& path,
                         std::vector<std::pair<std::string, std::vector<std::string>>>& leaves) {
    const std::string type = node.at("type").get<std::string>();
    if (type == "leaf") {
        std::vector<std::string> ids;
        for (const auto& id : node.at("entities")) ids.push_back(id.get<std::string>());
        leaves.emplace_back(path.empty() ? "root" : path, std::move(ids));
        return;
    }
    if (type != "split") throw InputError("tree file: unknown node type '" + type + "'");
    const std::string feature = node.at("feature").get<std::string>();
    const std::string prefix = path.empty() ? "" : path + "/";
    collect_file_leaves(node.at("left"), prefix + feature + "=0", leaves);
    collect_file_leaves(node.at("right"), prefix + feature + "=1", leaves);
}

}  // namespace

Clustering clustering_from_tree_file(const std::string& path, const EmbeddingSet& emb) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw InputError(path + ": invalid JSON (" + e.what() + ")");
    }
    if (!doc.contains("root")) throw InputError(path + ": missing 'root' node");

    std::vector<std::pair<std::string, std::vector<std::string>>> leaves;
    collect_file_leaves(doc.at("root"), "", leaves);

    std::unordered_map<std::string, int> leaf_of;
    for (std::size_t k = 0; k < leaves.size(); ++k)
        for (const auto& id : leaves[k].second) leaf_of.emplace(id, static_cast<int>(k));

    std::vector<int> assignment(emb.ids.size());
    std::vector<long long> counts(leaves.size(), 0);
    for (std::size_t i = 0; i < emb.ids.size(); ++i) {
        const auto it = leaf_of.find(emb.ids[i]);
        if (it == leaf_of.end())
            throw InputError(path + ": embedding id '" + emb.ids[i] +
                             "' does not appear in any leaf");
        assignment[i] = it->second;
        ++counts[static_cast<std::size_t>(it->second)];
    }

    // leaves that lost all their entities to the id restriction drop out
    std::vector<int> remap(leaves.size(), -1);
    Clustering clustering;
    for (std::size_t k = 0; k < leaves.size(); ++k) {
        if (counts[k] == 0) continue;
        remap[k] = clustering.m++;
        clustering.labels.push_back(leaves[k].first);
    }
    clustering.criterion = "tree-file:" + path;
    clustering.assignment.reserve(assignment.size());
    for (const int a : assignment)
        clustering.assignment.push_back(remap[static_cast<std::size_t>(a)]);
    validate_clustering(clustering);
    return clustering;
}

}  // namespace embeval
