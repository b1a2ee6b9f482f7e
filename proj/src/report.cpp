#include "embeval/report.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>

#include "embeval/error.hpp"
#include "embeval/rng.hpp"

namespace embeval {

namespace {

using ordered_json = nlohmann::ordered_json;

// NaN would serialize as JSON null anyway; make it explicit.
ordered_json finite_or_null(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

}  // namespace

std::string sha256_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError(path + ": cannot open file");

    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (!ctx) throw InternalError("sha256: cannot allocate digest context");
    if (EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
        EVP_MD_CTX_free(ctx);
        throw InternalError("sha256: init failed");
    }
    char buffer[65536];
    while (in) {
        in.read(buffer, sizeof(buffer));
        const auto got = in.gcount();
        if (got > 0 && EVP_DigestUpdate(ctx, buffer, static_cast<std::size_t>(got)) != 1) {
            EVP_MD_CTX_free(ctx);
            throw InternalError("sha256: update failed");
        }
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_DigestFinal_ex(ctx, digest, &length) != 1) {
        EVP_MD_CTX_free(ctx);
        throw InternalError("sha256: final failed");
    }
    EVP_MD_CTX_free(ctx);

    static const char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * length);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0x0f]);
    }
    return out;
}

ordered_json manifest_json(const RunManifest& manifest) {
    ordered_json j;
    j["command"] = manifest.command_line;
    auto inputs = ordered_json::array();
    for (const auto& input : manifest.inputs) {
        ordered_json entry;
        entry["role"] = input.role;
        entry["path"] = input.path;
        entry["sha256"] = input.sha256;
        inputs.push_back(std::move(entry));
    }
    j["inputs"] = std::move(inputs);
    j["tool_version"] = kToolVersion;
    j["schema_version"] = kSchemaVersion;
    j["rng"] = rng::kAlgorithmId;
    j["seeds"] = manifest.seeds;
    j["duration_seconds"] = manifest.duration_seconds;
    return j;
}

ordered_json alp_report_json(const ALPReport& report) {
    ordered_json j;
    j["alp"] = report.alp;
    j["accuracy"] = report.accuracy;
    j["n_total"] = report.n_total;
    j["n_clipped"] = report.n_clipped;
    j["clip_threshold_desc"] = report.clip_threshold_desc;
    auto per_cluster = ordered_json::array();
    for (const auto& c : report.per_cluster) {
        ordered_json entry;
        entry["cluster"] = c.cluster;
        entry["label"] = c.label;
        entry["n"] = c.n;
        entry["n_clipped"] = c.n_clipped;
        entry["mean_log_posterior"] = finite_or_null(c.mean_log_posterior);
        entry["accuracy"] = c.accuracy;
        per_cluster.push_back(std::move(entry));
    }
    j["per_cluster"] = std::move(per_cluster);
    return j;
}

ordered_json mean_alp_report_json(const MeanALPReport& report) {
    ordered_json j;
    j["mean_alp"] = report.mean_alp;
    j["mean_accuracy"] = report.mean_accuracy;
    j["v"] = report.v;
    j["n_heads"] = report.n_heads;
    j["seed"] = report.seed;
    j["heads_partition"] = report.partition;
    auto heads = ordered_json::array();
    for (const auto& head : report.head_reports) {
        ordered_json entry;
        entry["dims"] = head.dims;
        entry["report"] = alp_report_json(head.report);
        heads.push_back(std::move(entry));
    }
    j["head_reports"] = std::move(heads);
    return j;
}

ordered_json comparison_report_json(const ComparisonReport& report) {
    ordered_json j;
    j["alp_a_a"] = report.alp_aa;
    j["alp_a_b"] = report.alp_ab;
    j["alp_b_a"] = report.alp_ba;
    j["alp_b_b"] = report.alp_bb;
    auto pairs = ordered_json::array();
    {
        ordered_json pair;
        pair["criterion"] = "S_A";
        pair["alp_embedding_a"] = report.alp_aa;
        pair["alp_embedding_b"] = report.alp_ab;
        pair["preferred"] = report.alp_aa > report.alp_ab ? "A"
                            : report.alp_ab > report.alp_aa ? "B"
                                                            : "tie";
        pairs.push_back(std::move(pair));
    }
    {
        ordered_json pair;
        pair["criterion"] = "S_B";
        pair["alp_embedding_a"] = report.alp_ba;
        pair["alp_embedding_b"] = report.alp_bb;
        pair["preferred"] = report.alp_ba > report.alp_bb ? "A"
                            : report.alp_bb > report.alp_ba ? "B"
                                                            : "tie";
        pairs.push_back(std::move(pair));
    }
    j["comparable_pairs"] = std::move(pairs);
    j["reports"] = {{"alp_a_a", alp_report_json(report.report_aa)},
                    {"alp_a_b", alp_report_json(report.report_ab)},
                    {"alp_b_a", alp_report_json(report.report_ba)},
                    {"alp_b_b", alp_report_json(report.report_bb)}};
    return j;
}

ordered_json correlation_json(const CorrelationResult& pearson_part,
                              const CorrelationResult& spearman_part) {
    ordered_json j;
    j["pearson"] = pearson_part.pearson_r.has_value() ? ordered_json(*pearson_part.pearson_r)
                                                      : ordered_json(nullptr);
    j["spearman"] = spearman_part.spearman_rho.has_value()
                        ? ordered_json(*spearman_part.spearman_rho)
                        : ordered_json(nullptr);
    j["n"] = pearson_part.n_points;
    if (pearson_part.undefined_reason.has_value())
        j["undefined_reason"] = *pearson_part.undefined_reason;
    else if (spearman_part.undefined_reason.has_value())
        j["undefined_reason"] = *spearman_part.undefined_reason;
    else
        j["undefined_reason"] = nullptr;
    return j;
}

ordered_json probe_json(const LinearProbe& probe) {
    ordered_json j;
    j["classes"] = probe.classes();
    j["dim"] = probe.dim();
    j["training_config"] = {{"learning_rate", probe.config.learning_rate},
                            {"epochs", probe.config.epochs},
                            {"l2_lambda", probe.config.l2_lambda},
                            {"seed", probe.config.seed}};
    j["converged"] = probe.final_loss;
    auto weights = ordered_json::array();
    for (int k = 0; k < probe.classes(); ++k) {
        auto row = ordered_json::array();
        for (long long c = 0; c < probe.dim(); ++c) row.push_back(probe.weights(k, c));
        weights.push_back(std::move(row));
    }
    j["weights"] = std::move(weights);
    auto bias = ordered_json::array();
    for (int k = 0; k < probe.classes(); ++k) bias.push_back(probe.bias(k));
    j["bias"] = std::move(bias);
    auto mean = ordered_json::array();
    auto scale = ordered_json::array();
    for (long long c = 0; c < probe.dim(); ++c) {
        mean.push_back(probe.feature_mean(c));
        scale.push_back(probe.feature_scale(c));
    }
    j["standardize"] = {{"mean", std::move(mean)}, {"scale", std::move(scale)}};
    return j;
}

}  // namespace embeval
