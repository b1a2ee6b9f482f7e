#include "embeval/synth.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "embeval/error.hpp"
#include "embeval/rng.hpp"

namespace embeval {

namespace {

constexpr double kRadiusSeparated = 20.0;
constexpr double kRadiusPartial = 5.0;

Eigen::VectorXd random_direction(int dim, rng::Stream& stream) {
    Eigen::VectorXd v(dim);
    for (;;) {
        for (int j = 0; j < dim; ++j) v(j) = stream.next_normal();
        const double norm = v.norm();
        if (norm > 1e-12) return v / norm;
    }
}

}  // namespace

ScenarioKind parse_scenario_kind(const std::string& text) {
    if (text == "separated") return ScenarioKind::Separated;
    if (text == "partial") return ScenarioKind::Partial;
    if (text == "overlap") return ScenarioKind::Overlap;
    throw InputError("unknown scenario kind '" + text +
                     "' (expected separated|partial|overlap)");
}

std::string scenario_kind_name(ScenarioKind kind) {
    switch (kind) {
        case ScenarioKind::Separated:
            return "separated";
        case ScenarioKind::Partial:
            return "partial";
        case ScenarioKind::Overlap:
            return "overlap";
    }
    return "?";
}

GmmSpec scenario_spec(ScenarioKind kind, int clusters, int dim, long long n_per,
                      std::uint64_t seed) {
    if (clusters < 1) throw InputError("scenario: k must be >= 1");
    if (dim < 1) throw InputError("scenario: dim must be >= 1");
    if (n_per < 1) throw InputError("scenario: n-per must be >= 1");

    GmmSpec spec;
    spec.clusters = clusters;
    spec.dim = dim;
    spec.seed = seed;
    spec.kind = scenario_kind_name(kind);
    switch (kind) {
        case ScenarioKind::Separated:
            spec.radius = kRadiusSeparated;
            break;
        case ScenarioKind::Partial:
            spec.radius = kRadiusPartial;
            break;
        case ScenarioKind::Overlap:
            spec.radius = 0.0;
            break;
    }

    spec.means = Eigen::MatrixXd::Zero(clusters, dim);
    if (spec.radius > 0.0) {
        if (dim == 2) {
            for (int k = 0; k < clusters; ++k) {
                const double angle = 2.0 * std::numbers::pi * k / clusters;
                spec.means(k, 0) = spec.radius * std::cos(angle);
                spec.means(k, 1) = spec.radius * std::sin(angle);
            }
        } else {
            rng::Stream stream(seed, rng::stream_id(rng::kStreamSynthMeans, 0));
            for (int k = 0; k < clusters; ++k)
                spec.means.row(k) = (spec.radius * random_direction(dim, stream)).transpose();
        }
    }
    spec.covariances.assign(static_cast<std::size_t>(clusters),
                            Eigen::MatrixXd::Identity(dim, dim));
    spec.points_per_cluster.assign(static_cast<std::size_t>(clusters), n_per);
    return spec;
}

std::pair<EmbeddingSet, Clustering> generate(const GmmSpec& spec) {
    if (spec.clusters < 1 || spec.dim < 1) throw InputError("generate: invalid spec");
    if (spec.means.rows() != spec.clusters || spec.means.cols() != spec.dim)
        throw InputError("generate: means shape does not match spec");
    if (spec.covariances.size() != static_cast<std::size_t>(spec.clusters) ||
        spec.points_per_cluster.size() != static_cast<std::size_t>(spec.clusters))
        throw InputError("generate: per-cluster fields do not match spec");

    long long total = 0;
    for (const auto c : spec.points_per_cluster) {
        if (c < 1) throw InputError("generate: points_per_cluster must be >= 1");
        total += c;
    }

    std::vector<Eigen::MatrixXd> chol(spec.covariances.size());
    for (std::size_t k = 0; k < spec.covariances.size(); ++k) {
        const auto& cov = spec.covariances[k];
        if (cov.rows() != spec.dim || cov.cols() != spec.dim)
            throw InputError("generate: covariance shape mismatch");
        const bool identity = cov.isIdentity(0.0);
        if (identity) {
            chol[k] = Eigen::MatrixXd();  // empty marks the identity fast path
            continue;
        }
        Eigen::LLT<Eigen::MatrixXd> llt(cov);
        if (llt.info() != Eigen::Success)
            throw InputError("generate: covariance " + std::to_string(k) +
                             " is not positive definite");
        chol[k] = llt.matrixL();
    }

    EmbeddingSet emb;
    emb.name = "synth-" + spec.kind;
    emb.matrix.resize(total, spec.dim);
    emb.ids.reserve(static_cast<std::size_t>(total));
    for (long long i = 0; i < total; ++i) emb.ids.push_back("e" + std::to_string(i));

    Clustering clustering;
    clustering.m = spec.clusters;
    clustering.criterion = "synthetic:" + spec.kind;
    clustering.assignment.reserve(static_cast<std::size_t>(total));
    for (int k = 0; k < spec.clusters; ++k) clustering.labels.push_back(std::to_string(k));

    rng::Stream stream(spec.seed, rng::stream_id(rng::kStreamSynthPoints, 0));
    Eigen::VectorXd z(spec.dim);
    long long row = 0;
    for (int k = 0; k < spec.clusters; ++k) {
        const auto count = spec.points_per_cluster[static_cast<std::size_t>(k)];
        for (long long i = 0; i < count; ++i, ++row) {
            for (int j = 0; j < spec.dim; ++j) z(j) = stream.next_normal();
            if (chol[static_cast<std::size_t>(k)].size() == 0)
                emb.matrix.row(row) = spec.means.row(k) + z.transpose();
            else
                emb.matrix.row(row) =
                    spec.means.row(k) +
                    (chol[static_cast<std::size_t>(k)] * z).transpose();
            clustering.assignment.push_back(k);
        }
    }
    return {std::move(emb), std::move(clustering)};
}

std::string gmm_spec_to_json(const GmmSpec& spec) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["kind"] = spec.kind;
    j["clusters"] = spec.clusters;
    j["dim"] = spec.dim;
    j["radius"] = spec.radius;
    j["seed"] = spec.seed;
    j["rng"] = rng::kAlgorithmId;
    j["points_per_cluster"] = spec.points_per_cluster;
    auto means = nlohmann::ordered_json::array();
    for (int k = 0; k < spec.clusters; ++k) {
        auto row = nlohmann::ordered_json::array();
        for (int c = 0; c < spec.dim; ++c) row.push_back(spec.means(k, c));
        means.push_back(std::move(row));
    }
    j["means"] = std::move(means);
    auto covs = nlohmann::ordered_json::array();
    for (const auto& cov : spec.covariances) {
        auto mat = nlohmann::ordered_json::array();
        for (int r = 0; r < spec.dim; ++r) {
            auto row = nlohmann::ordered_json::array();
            for (int c = 0; c < spec.dim; ++c) row.push_back(cov(r, c));
            mat.push_back(std::move(row));
        }
        covs.push_back(std::move(mat));
    }
    j["covariances"] = std::move(covs);
    return j.dump(2) + "\n";
}

void write_gmm_spec_json(const GmmSpec& spec, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError(path + ": cannot open for writing");
    out << gmm_spec_to_json(spec);
    if (!out) throw InputError(path + ": write failed");
}

}  // namespace embeval
