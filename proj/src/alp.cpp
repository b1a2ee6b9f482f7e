#include "embeval/alp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "embeval/error.hpp"
#include "embeval/parallel.hpp"
#include "embeval/rng.hpp"

namespace embeval {

namespace {

std::vector<int> full_dims(long long d) {
    std::vector<int> dims(static_cast<std::size_t>(d));
    for (long long j = 0; j < d; ++j) dims[static_cast<std::size_t>(j)] = static_cast<int>(j);
    return dims;
}

// Gather selected dims of selected rows as columns (v x n).
Eigen::MatrixXd gather_cols(const Eigen::MatrixXd& matrix, const std::vector<int>& dims,
                            const int* rows, std::size_t n_rows) {
    Eigen::MatrixXd out(static_cast<long long>(dims.size()), static_cast<long long>(n_rows));
    for (std::size_t c = 0; c < n_rows; ++c)
        for (std::size_t r = 0; r < dims.size(); ++r)
            out(static_cast<long long>(r), static_cast<long long>(c)) =
                matrix(rows[c], dims[r]);
    return out;
}

void check_model_inputs(const ClusterModel& model, const EmbeddingSet& emb,
                        const Clustering& clustering) {
    if (emb.n() != clustering.n())
        throw InputError("alp_score: embeddings and clustering disagree on N");
    if (model.m() != clustering.m)
        throw InputError("alp_score: clustering has m=" + std::to_string(clustering.m) +
                         " but the model has m=" + std::to_string(model.m()));
    if (!model.dims.empty() && model.dims.back() >= emb.dim())
        throw InputError("alp_score: model was fit on dimensions the embeddings lack");
}

struct ChunkPartial {
    double log_posterior_sum = 0.0;
    long long retained = 0;
    long long clipped = 0;
    long long correct = 0;
    std::vector<double> cluster_sum;
    std::vector<long long> cluster_retained, cluster_clipped, cluster_correct, cluster_n;
};

}  // namespace

ClusterModel fit_cluster_model(const EmbeddingSet& emb, const Clustering& clustering,
                               RegularizationMode reg,
                               const std::optional<std::vector<int>>& dims, int threads) {
    if (emb.n() != clustering.n())
        throw InputError("fit_cluster_model: embeddings and clustering disagree on N");
    if (emb.n() < 1) throw InputError("fit_cluster_model: empty embedding set");

    std::vector<int> use_dims;
    if (dims.has_value()) {
        if (dims->empty()) throw InputError("fit_cluster_model: dims must not be empty");
        use_dims = *dims;
        std::sort(use_dims.begin(), use_dims.end());
        if (std::adjacent_find(use_dims.begin(), use_dims.end()) != use_dims.end())
            throw InputError("fit_cluster_model: duplicate dimension");
        if (use_dims.front() < 0 || use_dims.back() >= emb.dim())
            throw InputError("fit_cluster_model: dimension out of range");
    } else {
        use_dims = full_dims(emb.dim());
    }

    const auto m = clustering.m;
    std::vector<std::vector<int>> members(static_cast<std::size_t>(m));
    for (long long i = 0; i < clustering.n(); ++i)
        members[static_cast<std::size_t>(clustering.assignment[static_cast<std::size_t>(i)])]
            .push_back(static_cast<int>(i));
    for (int k = 0; k < m; ++k)
        if (members[static_cast<std::size_t>(k)].empty())
            throw InputError("fit_cluster_model: cluster " + std::to_string(k) + " is empty");

    const double total = static_cast<double>(emb.n());
    ClusterModel model;
    model.reg = reg;
    model.dims = use_dims;
    model.source = emb.name + " | " + clustering.criterion;
    model.components.resize(static_cast<std::size_t>(m));

    par::for_each_task(static_cast<std::size_t>(m), threads, [&](std::size_t k) {
        const auto& rows = members[k];
        const Eigen::MatrixXd pts =
            gather_cols(emb.matrix, use_dims, rows.data(), rows.size()).transpose();
        auto [mean, cov] = fit_mle(pts);
        const double log_weight = std::log(static_cast<double>(rows.size()) / total);
        model.components[k] = make_component(std::move(mean), cov, log_weight, reg);
    });
    return model;
}

Eigen::VectorXd log_posterior(const ClusterModel& model, const Eigen::VectorXd& x) {
    const auto m = model.m();
    if (model.dims.empty() || model.dims.back() >= x.size())
        throw InputError("posterior: point has fewer dimensions than the model");
    Eigen::VectorXd selected(model.v());
    for (int r = 0; r < model.v(); ++r)
        selected(r) = x(model.dims[static_cast<std::size_t>(r)]);
    Eigen::VectorXd scores(m);
    for (int k = 0; k < m; ++k) {
        const auto& comp = model.components[static_cast<std::size_t>(k)];
        scores(k) = comp.log_weight + log_density(comp, selected);
    }
    const double top = scores.maxCoeff();
    const double lse = top + std::log((scores.array() - top).exp().sum());
    return scores.array() - lse;
}

Eigen::VectorXd posterior(const ClusterModel& model, const Eigen::VectorXd& x) {
    return log_posterior(model, x).array().exp();
}

ALPReport alp_score(const ClusterModel& model, const EmbeddingSet& emb,
                    const Clustering& clustering, double clip_eps, int threads) {
    if (clip_eps < 0.0) throw InputError("alp_score: clip_eps must be >= 0");
    check_model_inputs(model, emb, clustering);

    const auto n = static_cast<std::size_t>(emb.n());
    const auto m = model.m();

    // Log-space clip thresholds: entity in cluster k is clipped when
    // log p < log(w_k * clip_eps). clip_eps = 0 disables clipping.
    std::vector<double> log_clip(static_cast<std::size_t>(m),
                                 -std::numeric_limits<double>::infinity());
    if (clip_eps > 0.0)
        for (int k = 0; k < m; ++k)
            log_clip[static_cast<std::size_t>(k)] =
                model.components[static_cast<std::size_t>(k)].log_weight + std::log(clip_eps);

    std::vector<int> row_index(n);
    for (std::size_t i = 0; i < n; ++i) row_index[i] = static_cast<int>(i);

    const std::size_t chunks = par::chunk_count(n);
    std::vector<ChunkPartial> partials(chunks);

    par::for_each_chunk(n, threads, [&](std::size_t c, std::size_t begin, std::size_t end) {
        ChunkPartial part;
        part.cluster_sum.assign(static_cast<std::size_t>(m), 0.0);
        part.cluster_retained.assign(static_cast<std::size_t>(m), 0);
        part.cluster_clipped.assign(static_cast<std::size_t>(m), 0);
        part.cluster_correct.assign(static_cast<std::size_t>(m), 0);
        part.cluster_n.assign(static_cast<std::size_t>(m), 0);

        const std::size_t count = end - begin;
        const Eigen::MatrixXd cols =
            gather_cols(emb.matrix, model.dims, row_index.data() + begin, count);
        Eigen::MatrixXd scores(static_cast<long long>(count), m);
        for (int k = 0; k < m; ++k) {
            const auto& comp = model.components[static_cast<std::size_t>(k)];
            scores.col(k) = log_density_batch(comp, cols).array() + comp.log_weight;
        }
        for (std::size_t i = 0; i < count; ++i) {
            const auto row = scores.row(static_cast<long long>(i));
            int argmax = 0;
            double top = row(0);
            for (int k = 1; k < m; ++k)
                if (row(k) > top) {  // strict: ties go to the lowest index
                    top = row(k);
                    argmax = k;
                }
            const double lse = top + std::log((row.array() - top).exp().sum());
            const int assigned = clustering.assignment[begin + i];
            const double lp = row(assigned) - lse;

            const auto ak = static_cast<std::size_t>(assigned);
            ++part.cluster_n[ak];
            if (argmax == assigned) {
                ++part.correct;
                ++part.cluster_correct[ak];
            }
            if (lp < log_clip[ak]) {
                ++part.clipped;
                ++part.cluster_clipped[ak];
            } else {
                part.log_posterior_sum += lp;
                ++part.retained;
                part.cluster_sum[ak] += lp;
                ++part.cluster_retained[ak];
            }
        }
        partials[c] = std::move(part);
    });

    ALPReport report;
    report.n_total = static_cast<long long>(n);
    std::vector<double> cluster_sum(static_cast<std::size_t>(m), 0.0);
    std::vector<long long> cluster_retained(static_cast<std::size_t>(m), 0),
        cluster_clipped(static_cast<std::size_t>(m), 0),
        cluster_correct(static_cast<std::size_t>(m), 0),
        cluster_n(static_cast<std::size_t>(m), 0);
    double log_sum = 0.0;
    long long retained = 0, clipped = 0, correct = 0;
    for (const auto& part : partials) {  // fixed chunk order: deterministic reduction
        log_sum += part.log_posterior_sum;
        retained += part.retained;
        clipped += part.clipped;
        correct += part.correct;
        for (int k = 0; k < m; ++k) {
            const auto ks = static_cast<std::size_t>(k);
            cluster_sum[ks] += part.cluster_sum[ks];
            cluster_retained[ks] += part.cluster_retained[ks];
            cluster_clipped[ks] += part.cluster_clipped[ks];
            cluster_correct[ks] += part.cluster_correct[ks];
            cluster_n[ks] += part.cluster_n[ks];
        }
    }

    if (retained == 0) throw InputError("alp_score: every entity was clipped");
    report.alp = log_sum / static_cast<double>(retained);
    report.accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n);
    report.n_clipped = clipped;
    if (clip_eps > 0.0) {
        char desc[64];
        std::snprintf(desc, sizeof(desc), "posterior < (n_k/N) * %g", clip_eps);
        report.clip_threshold_desc = desc;
    } else {
        report.clip_threshold_desc = "disabled (clip_eps = 0)";
    }
    report.per_cluster.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        auto& pc = report.per_cluster[ks];
        pc.cluster = k;
        pc.label = ks < clustering.labels.size() ? clustering.labels[ks] : "";
        pc.n = cluster_n[ks];
        pc.n_clipped = cluster_clipped[ks];
        pc.mean_log_posterior = cluster_retained[ks] > 0
                                    ? cluster_sum[ks] / static_cast<double>(cluster_retained[ks])
                                    : std::numeric_limits<double>::quiet_NaN();
        pc.accuracy = pc.n > 0 ? 100.0 * static_cast<double>(cluster_correct[ks]) /
                                     static_cast<double>(pc.n)
                               : 0.0;
    }
    return report;
}

MeanALPReport mean_alp_multihead(const EmbeddingSet& emb, const Clustering& clustering,
                                 RegularizationMode reg, int v, int n_heads,
                                 std::uint64_t seed, double clip_eps, bool partition,
                                 int threads) {
    const auto d = emb.dim();
    if (v < 1) throw InputError("head-dims must be >= 1");
    if (v > d)
        throw InputError("head-dims (" + std::to_string(v) + ") exceeds embedding dimension (" +
                         std::to_string(d) + ")");
    if (n_heads < 1) throw InputError("heads must be >= 1");

    std::vector<std::vector<int>> head_dims(static_cast<std::size_t>(n_heads));
    if (v == d) {
        for (auto& dims : head_dims) dims = full_dims(d);
    } else if (partition) {
        if (static_cast<long long>(v) * n_heads > d)
            throw InputError("heads-partition needs heads * head-dims <= dimension");
        rng::Stream stream(seed, rng::stream_id(rng::kStreamHeadPartition, 0));
        const std::vector<int> perm = rng::shuffled_indices(static_cast<int>(d), stream);
        for (int h = 0; h < n_heads; ++h) {
            auto& dims = head_dims[static_cast<std::size_t>(h)];
            dims.assign(perm.begin() + static_cast<std::ptrdiff_t>(h) * v,
                        perm.begin() + static_cast<std::ptrdiff_t>(h + 1) * v);
            std::sort(dims.begin(), dims.end());
        }
    } else {
        for (int h = 0; h < n_heads; ++h) {
            rng::Stream stream(seed,
                               rng::stream_id(rng::kStreamHeadDims, static_cast<std::uint64_t>(h)));
            head_dims[static_cast<std::size_t>(h)] =
                rng::sample_without_replacement(static_cast<int>(d), v, stream);
        }
    }

    MeanALPReport out;
    out.v = v;
    out.n_heads = n_heads;
    out.seed = seed;
    out.partition = partition;
    out.head_reports.resize(static_cast<std::size_t>(n_heads));

    const int inner_threads = n_heads == 1 ? threads : 1;
    par::for_each_task(static_cast<std::size_t>(n_heads), threads, [&](std::size_t h) {
        const auto& dims = head_dims[h];
        const ClusterModel model = fit_cluster_model(emb, clustering, reg, dims, inner_threads);
        out.head_reports[h] =
            HeadReport{dims, alp_score(model, emb, clustering, clip_eps, inner_threads)};
    });

    double alp_sum = 0.0, acc_sum = 0.0;
    for (const auto& head : out.head_reports) {
        alp_sum += head.report.alp;
        acc_sum += head.report.accuracy;
    }
    out.mean_alp = alp_sum / n_heads;
    out.mean_accuracy = acc_sum / n_heads;
    return out;
}

ComparisonReport compare_embeddings(const EmbeddingSet& emb_a, const EmbeddingSet& emb_b,
                                    const Clustering& clust_a, const Clustering& clust_b,
                                    RegularizationMode reg, double clip_eps, int threads) {
    if (emb_a.ids != emb_b.ids)
        throw InputError("compare: the two embedding sets cover different entity ids");
    if (clust_a.n() != emb_a.n() || clust_b.n() != emb_b.n())
        throw InputError("compare: clustering size does not match the embeddings");

    auto score = [&](const Clustering& criterion, const EmbeddingSet& emb) {
        const ClusterModel model =
            fit_cluster_model(emb, criterion, reg, std::nullopt, threads);
        return alp_score(model, emb, criterion, clip_eps, threads);
    };

    ComparisonReport report;
    report.report_aa = score(clust_a, emb_a);
    report.report_ab = score(clust_a, emb_b);
    report.report_ba = score(clust_b, emb_a);
    report.report_bb = score(clust_b, emb_b);
    report.alp_aa = report.report_aa.alp;
    report.alp_ab = report.report_ab.alp;
    report.alp_ba = report.report_ba.alp;
    report.alp_bb = report.report_bb.alp;
    return report;
}

}  // namespace embeval
