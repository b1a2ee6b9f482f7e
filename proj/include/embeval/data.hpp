#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace embeval {

// N entities x d embedding coordinates, plus stable entity identifiers.
// Immutable after construction; safe to share across threads for reading.
struct EmbeddingSet {
    std::vector<std::string> ids;
    Eigen::MatrixXd matrix;  // N x d, row i belongs to ids[i]
    std::string name;

    long long n() const { return matrix.rows(); }
    long long dim() const { return matrix.cols(); }
};

struct FeatureColumn {
    std::string name;
    std::vector<std::string> values;      // one per entity, parallel to ids
    std::vector<std::string> categories;  // distinct values, lexicographic
};

struct FeatureTable {
    std::vector<std::string> ids;
    std::vector<FeatureColumn> columns;

    long long n() const { return static_cast<long long>(ids.size()); }
    const FeatureColumn& column(const std::string& name) const;
    bool has_column(const std::string& name) const;
};

// One yes/no question: "does <source_column> equal <category>?"
struct BinaryColumn {
    std::string name;  // "<column>==<category>"
    std::string source_column;
    std::string category;
    std::vector<std::uint8_t> values;  // 0/1 per entity
};

struct BinaryFeatureTable {
    std::vector<std::string> ids;
    std::vector<BinaryColumn> columns;

    long long q() const { return static_cast<long long>(columns.size()); }
};

// Total assignment of entities to clusters 0..m-1.
struct Clustering {
    std::vector<int> assignment;
    int m = 0;
    std::vector<std::string> labels;  // per cluster, optional human names
    std::string criterion;            // description of the splitting rule S

    long long n() const { return static_cast<long long>(assignment.size()); }
};

enum class MissingPolicy { Error, Category };

// "∅" stands in for an empty cell when MissingPolicy::Category is active.
inline constexpr char kMissingCategory[] = "∅";

// CSV with header "id,e0,...,e{d-1}". Errors carry the offending line number.
EmbeddingSet load_embeddings(const std::string& path);

void write_embeddings_csv(const EmbeddingSet& emb, const std::string& path);

// CSV with header "id,<col1>,...". Cells are categorical strings.
FeatureTable load_features(const std::string& path,
                           MissingPolicy missing = MissingPolicy::Error);

// Replaces a numeric column with equal-frequency quantile bin labels
// "col∈[lo,hi)"; duplicate quantile boundaries collapse, so the result has
// at most nbins categories.
FeatureTable discretize_numeric(const FeatureTable& table, const std::string& column,
                                int nbins);

// One binary column per (column, category) pair, categories in lexicographic
// order. A column whose categories are exactly {"0","1"} passes through as a
// single column testing "==1".
BinaryFeatureTable binarize(const FeatureTable& table);

// Each distinct category of the column forms its own cluster; cluster indices
// follow lexicographic category order.
Clustering cluster_by_feature(const FeatureTable& table, const std::string& column);

// Restrict both datasets to the id intersection, in the embedding set's order.
std::pair<EmbeddingSet, FeatureTable> align(const EmbeddingSet& emb,
                                            const FeatureTable& feats);

// Clustering CSV: header "id,cluster".
void write_clustering_csv(const std::vector<std::string>& ids, const Clustering& clustering,
                          const std::string& path);

// Loads an "id,cluster" file and restricts the embedding set to the covered
// ids. Arbitrary integer cluster values are re-indexed to 0..m-1 in ascending
// numeric order; labels keep the original values.
std::pair<EmbeddingSet, Clustering> load_clustering_for(const EmbeddingSet& emb,
                                                        const std::string& path);

void validate_clustering(const Clustering& clustering);

}  // namespace embeval
