#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embeval/data.hpp"

namespace embeval {

enum class ScenarioKind { Separated, Partial, Overlap };

ScenarioKind parse_scenario_kind(const std::string& text);
std::string scenario_kind_name(ScenarioKind kind);

struct GmmSpec {
    int clusters = 0;
    int dim = 0;
    Eigen::MatrixXd means;                    // K x d
    std::vector<Eigen::MatrixXd> covariances; // K of d x d, positive definite
    std::vector<long long> points_per_cluster;
    std::uint64_t seed = 0;
    std::string kind;     // scenario tag, free-form for hand-built specs
    double radius = 0.0;  // mean placement radius used by scenario_spec
};

// Unit-variance isotropic components with means on a circle (d=2) or along
// seeded random directions (other d), at radius 20 / 5 / 0 for the
// separated / partial / overlap scenarios.
GmmSpec scenario_spec(ScenarioKind kind, int clusters, int dim, long long n_per,
                      std::uint64_t seed);

// Exactly points_per_cluster[k] draws from component k, cluster-major order;
// the clustering is the generator's ground-truth label. Deterministic in the
// seed via the counter-based normal stream.
std::pair<EmbeddingSet, Clustering> generate(const GmmSpec& spec);

std::string gmm_spec_to_json(const GmmSpec& spec);
void write_gmm_spec_json(const GmmSpec& spec, const std::string& path);

}  // namespace embeval
