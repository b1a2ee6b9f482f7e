#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "embeval/alp.hpp"
#include "embeval/csv.hpp"
#include "embeval/data.hpp"
#include "embeval/error.hpp"
#include "embeval/parallel.hpp"
#include "embeval/probe.hpp"
#include "embeval/report.hpp"
#include "embeval/synth.hpp"
#include "embeval/tree.hpp"

namespace {

using embeval::InputError;
using ordered_json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

struct Context {
    std::string command_line;
    Clock::time_point start = Clock::now();
    std::vector<embeval::InputDigest> inputs;
    std::vector<std::uint64_t> seeds;

    void track(const std::string& role, const std::string& path) {
        for (const auto& input : inputs)
            if (input.role == role && input.path == path) return;
        inputs.push_back({role, path, embeval::sha256_file(path)});
    }

    embeval::RunManifest manifest() const {
        embeval::RunManifest m;
        m.command_line = command_line;
        m.inputs = inputs;
        m.seeds = seeds;
        m.duration_seconds =
            std::chrono::duration<double>(Clock::now() - start).count();
        return m;
    }
};

std::string join_command_line(int argc, char** argv) {
    std::string out;
    for (int i = 0; i < argc; ++i) {
        if (i) out += ' ';
        const std::string arg = argv[i];
        if (arg.find(' ') != std::string::npos)
            out += '"' + arg + '"';
        else
            out += arg;
    }
    return out;
}

void emit(const ordered_json& doc, const std::string& out_path) {
    const std::string text = doc.dump(2) + "\n";
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw InputError(out_path + ": cannot open for writing");
    out << text;
    if (!out) throw InputError(out_path + ": write failed");
}

embeval::MissingPolicy parse_missing(const std::string& text) {
    if (text == "error") return embeval::MissingPolicy::Error;
    if (text == "category") return embeval::MissingPolicy::Category;
    throw InputError("bad --missing '" + text + "' (expected error|category)");
}

// Shared flags for commands that derive a clustering from inputs.
struct ClusterSource {
    std::string cluster_by;
    std::string clusters_path;
    std::string tree_path;
    std::string missing = "error";
    int discretize_bins = 0;

    void add_options(CLI::App* cmd, bool allow_tree) {
        cmd->add_option("--cluster-by", cluster_by,
                        "feature column; each category becomes a cluster");
        cmd->add_option("--clusters", clusters_path, "clustering CSV (id,cluster)");
        if (allow_tree) cmd->add_option("--tree", tree_path, "tree JSON from 'embeval tree'");
        cmd->add_option("--missing", missing, "missing feature cells: error|category")
            ->capture_default_str();
        cmd->add_option("--discretize-bins", discretize_bins,
                        "quantile-bin the --cluster-by column into this many bins first")
            ->capture_default_str();
    }

    int route_count() const {
        return (cluster_by.empty() ? 0 : 1) + (clusters_path.empty() ? 0 : 1) +
               (tree_path.empty() ? 0 : 1);
    }

    // Returns the embedding subset actually covered plus its clustering.
    std::pair<embeval::EmbeddingSet, embeval::Clustering> resolve(
        const embeval::EmbeddingSet& emb, const std::string& features_path, Context& ctx) const {
        if (route_count() != 1)
            throw InputError("choose exactly one of --cluster-by, --clusters, --tree");
        if (!cluster_by.empty()) {
            if (features_path.empty())
                throw InputError("--cluster-by needs --features");
            ctx.track("features", features_path);
            embeval::FeatureTable feats =
                embeval::load_features(features_path, parse_missing(missing));
            auto [emb_aligned, feats_aligned] = embeval::align(emb, feats);
            if (discretize_bins > 0)
                feats_aligned =
                    embeval::discretize_numeric(feats_aligned, cluster_by, discretize_bins);
            auto clustering = embeval::cluster_by_feature(feats_aligned, cluster_by);
            return {std::move(emb_aligned), std::move(clustering)};
        }
        if (!clusters_path.empty()) {
            ctx.track("clusters", clusters_path);
            return embeval::load_clustering_for(emb, clusters_path);
        }
        ctx.track("tree", tree_path);
        auto clustering = embeval::clustering_from_tree_file(tree_path, emb);
        return {emb, std::move(clustering)};
    }
};

ordered_json eval_context_json(const embeval::EmbeddingSet& emb,
                               const embeval::Clustering& clustering,
                               const embeval::RegularizationMode& reg, double clip_eps) {
    ordered_json j;
    j["n"] = emb.n();
    j["dim"] = emb.dim();
    j["m_clusters"] = clustering.m;
    j["criterion"] = clustering.criterion;
    j["reg"] = reg.describe();
    j["clip_eps"] = clip_eps;
    return j;
}

// ---- eval ----------------------------------------------------------------

struct EvalArgs {
    std::string embeddings_path, features_path, out_path, reg_text = "diag";
    ClusterSource source;
    double clip_eps = 1e-6;
    int heads = 1;
    int head_dims = 0;  // 0: use all dimensions
    bool head_dims_set = false;
    bool heads_partition = false;
    std::uint64_t seed = 0;
    int threads = 0;
};

int run_eval(const EvalArgs& args, Context& ctx) {
    ctx.seeds.push_back(args.seed);
    ctx.track("embeddings", args.embeddings_path);
    const embeval::EmbeddingSet raw = embeval::load_embeddings(args.embeddings_path);
    auto [emb, clustering] = args.source.resolve(raw, args.features_path, ctx);

    const auto reg = embeval::RegularizationMode::parse(args.reg_text);
    if (args.clip_eps < 0.0) throw InputError("clip-eps must be >= 0");
    if (args.heads < 1) throw InputError("heads must be >= 1");
    const int threads = embeval::par::resolve_threads(args.threads);

    const bool multihead = args.head_dims_set || args.heads > 1 || args.heads_partition;
    ordered_json doc;
    if (!multihead) {
        const auto model =
            embeval::fit_cluster_model(emb, clustering, reg, std::nullopt, threads);
        const auto report = embeval::alp_score(model, emb, clustering, args.clip_eps, threads);
        doc["report"] = "alp";
        doc["context"] = eval_context_json(emb, clustering, reg, args.clip_eps);
        doc.update(embeval::alp_report_json(report));
    } else {
        if (args.head_dims_set && args.head_dims < 1)
            throw InputError("head-dims must be >= 1");
        const int v = args.head_dims_set ? args.head_dims : static_cast<int>(emb.dim());
        const auto report = embeval::mean_alp_multihead(emb, clustering, reg, v, args.heads,
                                                        args.seed, args.clip_eps,
                                                        args.heads_partition, threads);
        doc["report"] = "mean_alp";
        doc["context"] = eval_context_json(emb, clustering, reg, args.clip_eps);
        doc.update(embeval::mean_alp_report_json(report));
    }
    doc["manifest"] = embeval::manifest_json(ctx.manifest());
    emit(doc, args.out_path);
    return 0;
}

// ---- tree ----------------------------------------------------------------

struct TreeArgs {
    std::string embeddings_path, features_path, prior_path, out_tree = "tree.json",
                out_clusters = "tree_clusters.csv", out_path, reg_text = "diag",
                missing = "error";
    int max_depth = 10;
    long long min_node = 50;
    bool report_normalized = false;
    int threads = 0;
};

embeval::FeaturePrior load_prior(const std::string& path,
                                 const embeval::BinaryFeatureTable& bin) {
    const auto table = embeval::csv::read_csv(path);
    if (table.header.size() != 2 || table.header[0] != "feature" ||
        table.header[1] != "weight")
        throw InputError(path + ":1: expected header 'feature,weight'");
    std::unordered_map<std::string, double> weight_of;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        double w = 0.0;
        if (!embeval::csv::parse_double(table.rows[r][1], w) || !(w > 0.0))
            throw InputError(path + ":" + std::to_string(table.row_lines[r]) +
                             ": weight must be a positive number");
        weight_of[table.rows[r][0]] = w;
    }
    std::vector<double> weights;
    weights.reserve(static_cast<std::size_t>(bin.q()));
    for (const auto& col : bin.columns) {
        const auto it = weight_of.find(col.name);
        weights.push_back(it == weight_of.end() ? 1.0 : it->second);
        if (it != weight_of.end()) weight_of.erase(it);
    }
    if (!weight_of.empty())
        throw InputError(path + ": unknown feature '" + weight_of.begin()->first + "'");
    double total = 0.0;
    for (const double w : weights) total += w;
    embeval::FeaturePrior prior;
    for (const double w : weights) prior.log_prior.push_back(std::log(w / total));
    return prior;
}

int run_tree(const TreeArgs& args, Context& ctx) {
    ctx.track("embeddings", args.embeddings_path);
    ctx.track("features", args.features_path);
    const embeval::EmbeddingSet raw = embeval::load_embeddings(args.embeddings_path);
    const embeval::FeatureTable feats =
        embeval::load_features(args.features_path, parse_missing(args.missing));
    auto [emb, feats_aligned] = embeval::align(raw, feats);

    const auto reg = embeval::RegularizationMode::parse(args.reg_text);
    std::optional<embeval::FeaturePrior> prior;
    if (!args.prior_path.empty()) {
        ctx.track("prior", args.prior_path);
        prior = load_prior(args.prior_path, embeval::binarize(feats_aligned));
    }

    embeval::TreeParams params;
    params.max_depth = args.max_depth;
    params.min_node_size = args.min_node;
    const auto tree =
        embeval::build_tree(emb, feats_aligned, params, reg, prior, args.report_normalized,
                            embeval::par::resolve_threads(args.threads));
    const auto clustering = embeval::leaf_clustering(tree);

    embeval::write_tree_json(tree, args.out_tree);
    embeval::write_clustering_csv(tree.ids, clustering, args.out_clusters);

    ordered_json doc;
    doc["report"] = "tree";
    doc["n"] = emb.n();
    doc["dim"] = emb.dim();
    doc["leaves"] = clustering.m;
    doc["reg"] = reg.describe();
    doc["stopping"] = {{"max_depth", params.max_depth}, {"min_node_size", params.min_node_size}};
    doc["outputs"] = {{{"role", "tree"}, {"path", args.out_tree},
                       {"sha256", embeval::sha256_file(args.out_tree)}},
                      {{"role", "clusters"}, {"path", args.out_clusters},
                       {"sha256", embeval::sha256_file(args.out_clusters)}}};
    doc["manifest"] = embeval::manifest_json(ctx.manifest());
    emit(doc, args.out_path);
    return 0;
}

// ---- synth ---------------------------------------------------------------

struct SynthArgs {
    std::string kind, out_prefix = "synth", out_path;
    int k = 10;
    int dim = 2;
    long long n_per = 1000;
    std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& args, Context& ctx) {
    ctx.seeds.push_back(args.seed);
    const auto kind = embeval::parse_scenario_kind(args.kind);
    const auto spec = embeval::scenario_spec(kind, args.k, args.dim, args.n_per, args.seed);
    const auto [emb, clustering] = embeval::generate(spec);

    const std::string emb_path = args.out_prefix + ".embeddings.csv";
    const std::string clusters_path = args.out_prefix + ".clusters.csv";
    const std::string spec_path = args.out_prefix + ".spec.json";
    embeval::write_embeddings_csv(emb, emb_path);
    embeval::write_clustering_csv(emb.ids, clustering, clusters_path);
    embeval::write_gmm_spec_json(spec, spec_path);

    ordered_json doc;
    doc["report"] = "synth";
    doc["kind"] = spec.kind;
    doc["n"] = emb.n();
    doc["dim"] = emb.dim();
    doc["clusters"] = spec.clusters;
    doc["outputs"] = {{{"role", "embeddings"}, {"path", emb_path},
                       {"sha256", embeval::sha256_file(emb_path)}},
                      {{"role", "clusters"}, {"path", clusters_path},
                       {"sha256", embeval::sha256_file(clusters_path)}},
                      {{"role", "spec"}, {"path", spec_path},
                       {"sha256", embeval::sha256_file(spec_path)}}};
    doc["manifest"] = embeval::manifest_json(ctx.manifest());
    emit(doc, args.out_path);
    return 0;
}

// ---- probe ---------------------------------------------------------------

struct ProbeArgs {
    std::string embeddings_path, features_path, eval_embeddings_path, out_path;
    ClusterSource source;
    double lr = 0.1, l2 = 1e-4;
    int epochs = 500;
    std::uint64_t seed = 0;
};

int run_probe(const ProbeArgs& args, Context& ctx) {
    ctx.seeds.push_back(args.seed);
    ctx.track("embeddings", args.embeddings_path);
    const embeval::EmbeddingSet raw = embeval::load_embeddings(args.embeddings_path);
    auto [emb, labels] = args.source.resolve(raw, args.features_path, ctx);

    embeval::ProbeConfig config;
    config.learning_rate = args.lr;
    config.epochs = args.epochs;
    config.l2_lambda = args.l2;
    config.seed = args.seed;

    const auto probe = embeval::train_linear_probe(emb, labels, config);
    const double train_accuracy = embeval::probe_accuracy(probe, emb, labels);

    ordered_json doc;
    doc["report"] = "probe";
    doc["n"] = emb.n();
    doc["criterion"] = labels.criterion;
    doc["train_accuracy"] = train_accuracy;

    if (!args.eval_embeddings_path.empty()) {
        ctx.track("eval_embeddings", args.eval_embeddings_path);
        const embeval::EmbeddingSet eval_raw =
            embeval::load_embeddings(args.eval_embeddings_path);
        auto [eval_emb, eval_labels] =
            args.source.resolve(eval_raw, args.features_path, ctx);
        // class indices must agree with the training clustering
        if (!args.source.cluster_by.empty()) {
            std::unordered_map<std::string, int> class_of;
            for (std::size_t k = 0; k < labels.labels.size(); ++k)
                class_of[labels.labels[k]] = static_cast<int>(k);
            for (std::size_t i = 0; i < eval_labels.assignment.size(); ++i) {
                const auto& label =
                    eval_labels.labels[static_cast<std::size_t>(eval_labels.assignment[i])];
                const auto it = class_of.find(label);
                if (it == class_of.end())
                    throw InputError("eval set has category '" + label +
                                     "' unseen in training labels");
                eval_labels.assignment[i] = it->second;
            }
            eval_labels.m = labels.m;
            eval_labels.labels = labels.labels;
        } else if (eval_labels.m != labels.m || eval_labels.labels != labels.labels) {
            throw InputError("eval clustering does not match the training clustering");
        }
        doc["eval_accuracy"] = embeval::probe_accuracy(probe, eval_emb, eval_labels);
    } else {
        doc["eval_accuracy"] = nullptr;
    }

    doc["probe"] = embeval::probe_json(probe);
    doc["manifest"] = embeval::manifest_json(ctx.manifest());
    emit(doc, args.out_path);
    return 0;
}

// ---- correlate -----------------------------------------------------------

struct CorrelateArgs {
    std::string series_path, out_path;
};

int run_correlate(const CorrelateArgs& args, Context& ctx) {
    ctx.track("series", args.series_path);
    const auto table = embeval::csv::read_csv(args.series_path);
    int col_alp = -1, col_acc = -1;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        if (table.header[c] == "alp") col_alp = static_cast<int>(c);
        if (table.header[c] == "probe_acc") col_acc = static_cast<int>(c);
    }
    if (col_alp < 0 || col_acc < 0)
        throw InputError(args.series_path + ": needs columns 'alp' and 'probe_acc'");
    if (table.rows.size() < 2)
        throw InputError(args.series_path + ": needs at least 2 rows");

    std::vector<double> alp, acc;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        double a = 0.0, b = 0.0;
        if (!embeval::csv::parse_double(table.rows[r][static_cast<std::size_t>(col_alp)], a) ||
            !embeval::csv::parse_double(table.rows[r][static_cast<std::size_t>(col_acc)], b))
            throw InputError(args.series_path + ":" + std::to_string(table.row_lines[r]) +
                             ": non-numeric cell");
        alp.push_back(a);
        acc.push_back(b);
    }

    const auto pearson_part = embeval::pearson(alp, acc);
    const auto spearman_part = embeval::spearman(alp, acc);
    ordered_json doc;
    doc["report"] = "correlation";
    doc.update(embeval::correlation_json(pearson_part, spearman_part));
    doc["manifest"] = embeval::manifest_json(ctx.manifest());
    emit(doc, args.out_path);
    return 0;
}

// ---- compare ---------------------------------------------------------------

struct CompareArgs {
    std::string embeddings_a, embeddings_b, features_path, cluster_by, tree_a, tree_b,
        out_path, reg_text = "diag", missing = "error";
    double clip_eps = 1e-6;
    int threads = 0;
};

// Reorder B's rows to A's id order; every A id must exist in B.
embeval::EmbeddingSet match_order(const embeval::EmbeddingSet& a,
                                  const embeval::EmbeddingSet& b) {
    std::unordered_map<std::string, long long> row_of;
    for (std::size_t i = 0; i < b.ids.size(); ++i)
        row_of[b.ids[i]] = static_cast<long long>(i);
    embeval::EmbeddingSet out;
    out.name = b.name;
    out.matrix.resize(a.n(), b.dim());
    out.ids.reserve(a.ids.size());
    for (std::size_t i = 0; i < a.ids.size(); ++i) {
        const auto it = row_of.find(a.ids[i]);
        if (it == row_of.end())
            throw InputError("compare: id '" + a.ids[i] + "' is missing from " + b.name);
        out.ids.push_back(a.ids[i]);
        out.matrix.row(static_cast<long long>(i)) = b.matrix.row(it->second);
    }
    return out;
}

int run_compare(const CompareArgs& args, Context& ctx) {
    const bool by_feature = !args.cluster_by.empty();
    const bool by_tree = !args.tree_a.empty() || !args.tree_b.empty();
    if (by_feature == by_tree)
        throw InputError("choose either --cluster-by or --tree-a/--tree-b");
    if (by_tree && (args.tree_a.empty() || args.tree_b.empty()))
        throw InputError("--tree-a and --tree-b are both required");

    ctx.track("embeddings_a", args.embeddings_a);
    ctx.track("embeddings_b", args.embeddings_b);
    embeval::EmbeddingSet emb_a = embeval::load_embeddings(args.embeddings_a);
    embeval::EmbeddingSet emb_b = embeval::load_embeddings(args.embeddings_b);

    embeval::Clustering clust_a, clust_b;
    if (by_feature) {
        if (args.features_path.empty()) throw InputError("--cluster-by needs --features");
        ctx.track("features", args.features_path);
        const auto feats =
            embeval::load_features(args.features_path, parse_missing(args.missing));
        auto [a_aligned, feats_aligned] = embeval::align(emb_a, feats);
        emb_a = std::move(a_aligned);
        emb_b = match_order(emb_a, emb_b);
        clust_a = embeval::cluster_by_feature(feats_aligned, args.cluster_by);
        clust_b = clust_a;  // shared criterion
    } else {
        ctx.track("tree_a", args.tree_a);
        ctx.track("tree_b", args.tree_b);
        emb_b = match_order(emb_a, emb_b);
        clust_a = embeval::clustering_from_tree_file(args.tree_a, emb_a);
        clust_b = embeval::clustering_from_tree_file(args.tree_b, emb_b);
    }

    const auto reg = embeval::RegularizationMode::parse(args.reg_text);
    if (args.clip_eps < 0.0) throw InputError("clip-eps must be >= 0");
    const auto report =
        embeval::compare_embeddings(emb_a, emb_b, clust_a, clust_b, reg, args.clip_eps,
                                    embeval::par::resolve_threads(args.threads));

    ordered_json doc;
    doc["report"] = "comparison";
    doc["n"] = emb_a.n();
    doc["criterion_a"] = clust_a.criterion;
    doc["criterion_b"] = clust_b.criterion;
    doc["reg"] = reg.describe();
    doc["clip_eps"] = args.clip_eps;
    doc.update(embeval::comparison_report_json(report));
    doc["manifest"] = embeval::manifest_json(ctx.manifest());
    emit(doc, args.out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"embeval - embedding quality scoring from meta-feature consistency"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("embeval ") + embeval::kToolVersion +
                                          " (schema " +
                                          std::to_string(embeval::kSchemaVersion) + ")");

    Context ctx;
    ctx.command_line = join_command_line(argc, argv);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand(
        "eval", "score embeddings against a clustering (ALP or multi-head Mean-ALP)");
    eval_cmd->add_option("--embeddings", eval_args.embeddings_path, "embedding CSV")
        ->required();
    eval_cmd->add_option("--features", eval_args.features_path, "feature CSV");
    eval_args.source.add_options(eval_cmd, true);
    eval_cmd->add_option("--reg", eval_args.reg_text, "diag|tikhonov:<lambda>|auto")
        ->capture_default_str();
    eval_cmd->add_option("--clip-eps", eval_args.clip_eps, "posterior clipping epsilon")
        ->capture_default_str();
    eval_cmd->add_option("--heads", eval_args.heads, "number of random subspace heads")
        ->capture_default_str();
    eval_cmd->add_option("--head-dims", eval_args.head_dims,
                         "dimensions per head (default: all)");
    eval_cmd->add_flag("--heads-partition", eval_args.heads_partition,
                       "use disjoint blocks of one shuffle instead of independent draws");
    eval_cmd->add_option("--seed", eval_args.seed, "seed for head sampling")
        ->capture_default_str();
    eval_cmd->add_option("--threads", eval_args.threads, "worker threads (0 = all cores)");
    eval_cmd->add_option("--out", eval_args.out_path, "write the JSON report here");

    TreeArgs tree_args;
    auto* tree_cmd =
        app.add_subcommand("tree", "build a meta-feature tree; leaves become clusters");
    tree_cmd->add_option("--embeddings", tree_args.embeddings_path, "embedding CSV")
        ->required();
    tree_cmd->add_option("--features", tree_args.features_path, "feature CSV")->required();
    tree_cmd->add_option("--max-depth", tree_args.max_depth, "maximum tree depth")
        ->capture_default_str();
    tree_cmd->add_option("--min-node", tree_args.min_node, "minimum entities per leaf")
        ->capture_default_str();
    tree_cmd->add_option("--reg", tree_args.reg_text, "diag|tikhonov:<lambda>|auto")
        ->capture_default_str();
    tree_cmd->add_option("--prior", tree_args.prior_path,
                         "feature prior CSV (feature,weight)");
    tree_cmd->add_option("--missing", tree_args.missing, "error|category")
        ->capture_default_str();
    tree_cmd->add_flag("--report-normalized", tree_args.report_normalized,
                       "record each split's normalized MAP score");
    tree_cmd->add_option("--out-tree", tree_args.out_tree, "tree JSON path")
        ->capture_default_str();
    tree_cmd->add_option("--out-clusters", tree_args.out_clusters, "leaf clustering CSV path")
        ->capture_default_str();
    tree_cmd->add_option("--threads", tree_args.threads, "worker threads (0 = all cores)");
    tree_cmd->add_option("--out", tree_args.out_path, "write the JSON report here");

    SynthArgs synth_args;
    auto* synth_cmd =
        app.add_subcommand("synth", "generate a synthetic Gaussian-mixture dataset");
    synth_cmd->add_option("--kind", synth_args.kind, "separated|partial|overlap")->required();
    synth_cmd->add_option("--k", synth_args.k, "number of clusters")->capture_default_str();
    synth_cmd->add_option("--dim", synth_args.dim, "embedding dimension")
        ->capture_default_str();
    synth_cmd->add_option("--n-per", synth_args.n_per, "points per cluster")
        ->capture_default_str();
    synth_cmd->add_option("--seed", synth_args.seed, "generator seed")->capture_default_str();
    synth_cmd->add_option("--out-prefix", synth_args.out_prefix, "output file prefix")
        ->capture_default_str();
    synth_cmd->add_option("--out", synth_args.out_path, "write the JSON report here");

    ProbeArgs probe_args;
    auto* probe_cmd =
        app.add_subcommand("probe", "train a linear probe on meta-feature labels");
    probe_cmd->add_option("--embeddings", probe_args.embeddings_path, "embedding CSV")
        ->required();
    probe_cmd->add_option("--features", probe_args.features_path, "feature CSV");
    probe_args.source.add_options(probe_cmd, false);
    probe_cmd->add_option("--epochs", probe_args.epochs, "gradient descent epochs")
        ->capture_default_str();
    probe_cmd->add_option("--lr", probe_args.lr, "learning rate")->capture_default_str();
    probe_cmd->add_option("--l2", probe_args.l2, "L2 penalty on weights")
        ->capture_default_str();
    probe_cmd->add_option("--seed", probe_args.seed, "recorded in the config")
        ->capture_default_str();
    probe_cmd->add_option("--eval-embeddings", probe_args.eval_embeddings_path,
                          "score the trained probe on this set too");
    probe_cmd->add_option("--out", probe_args.out_path, "write the JSON report here");

    CorrelateArgs correlate_args;
    auto* correlate_cmd = app.add_subcommand(
        "correlate", "Pearson/Spearman between 'alp' and 'probe_acc' series");
    correlate_cmd->add_option("--series", correlate_args.series_path,
                              "CSV with columns alp,probe_acc")
        ->required();
    correlate_cmd->add_option("--out", correlate_args.out_path, "write the JSON report here");

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand(
        "compare", "the four cross scores of two embedding sets under two criteria");
    compare_cmd->add_option("--embeddings-a", compare_args.embeddings_a, "embedding CSV A")
        ->required();
    compare_cmd->add_option("--embeddings-b", compare_args.embeddings_b, "embedding CSV B")
        ->required();
    compare_cmd->add_option("--features", compare_args.features_path, "feature CSV");
    compare_cmd->add_option("--cluster-by", compare_args.cluster_by,
                            "shared criterion: one feature column");
    compare_cmd->add_option("--tree-a", compare_args.tree_a, "criterion S_A tree JSON");
    compare_cmd->add_option("--tree-b", compare_args.tree_b, "criterion S_B tree JSON");
    compare_cmd->add_option("--reg", compare_args.reg_text, "diag|tikhonov:<lambda>|auto")
        ->capture_default_str();
    compare_cmd->add_option("--clip-eps", compare_args.clip_eps, "posterior clipping epsilon")
        ->capture_default_str();
    compare_cmd->add_option("--missing", compare_args.missing, "error|category")
        ->capture_default_str();
    compare_cmd->add_option("--threads", compare_args.threads, "worker threads (0 = all cores)");
    compare_cmd->add_option("--out", compare_args.out_path, "write the JSON report here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    eval_args.head_dims_set = eval_cmd->count("--head-dims") > 0;

    try {
        if (eval_cmd->parsed()) return run_eval(eval_args, ctx);
        if (tree_cmd->parsed()) return run_tree(tree_args, ctx);
        if (synth_cmd->parsed()) return run_synth(synth_args, ctx);
        if (probe_cmd->parsed()) return run_probe(probe_args, ctx);
        if (correlate_cmd->parsed()) return run_correlate(correlate_args, ctx);
        if (compare_cmd->parsed()) return run_compare(compare_args, ctx);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
}
