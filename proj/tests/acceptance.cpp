// Acceptance suite: runs every release criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exits nonzero if any fail.
//
// Usage: acceptance [path-to-embeval-cli]   (or EMBEVAL_BIN in the env)

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "embeval/alp.hpp"
#include "embeval/data.hpp"
#include "embeval/gaussian.hpp"
#include "embeval/probe.hpp"
#include "embeval/rng.hpp"
#include "embeval/synth.hpp"
#include "embeval/tree.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace embeval;

namespace {

std::string g_cli;
fs::path g_dir;
int g_failures = 0;

struct Criterion {
    int number = 0;
    std::string label;
    bool ok = true;
    std::string detail;

    void require(bool condition, const std::string& what) {
        if (!condition) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
    void finish() {
        if (ok) {
            std::cout << "[PASS] criterion " << number << ": " << label;
            if (!detail.empty()) std::cout << " (" << detail << ")";
            std::cout << "\n";
        } else {
            std::cout << "[FAIL] criterion " << number << ": " << label << " -- " << detail
                      << "\n";
            ++g_failures;
        }
    }
};

struct RunResult {
    int exit_code = -1;
    std::string out;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

RunResult run_cli(const std::string& args) {
    const auto out_path = g_dir / "cli_stdout.txt";
    const std::string cmd =
        g_cli + " " + args + " > " + out_path.string() + " 2> " + (g_dir / "cli_stderr.txt").string();
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_path);
    return result;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

// ---------------------------------------------------------------------------

void criterion_1_separated_reproduction() {
    Criterion c{1, "separated scenario reproduces ALP ~ 0 and accuracy 100%", true, ""};
    const auto start = std::chrono::steady_clock::now();
    const std::string prefix = (g_dir / "c1").string();
    const auto synth = run_cli("synth --kind separated --k 10 --dim 2 --n-per 1000 --seed 1 "
                               "--out-prefix " + prefix);
    c.require(synth.exit_code == 0, "synth failed");
    if (c.ok) {
        const auto eval = run_cli("eval --embeddings " + prefix + ".embeddings.csv --clusters " +
                                  prefix + ".clusters.csv --reg diag --clip-eps 1e-6");
        c.require(eval.exit_code == 0, "eval failed");
        if (c.ok) {
            const auto report = json::parse(eval.out);
            const double alp = report["alp"].get<double>();
            const double accuracy = report["accuracy"].get<double>();
            c.require(alp >= -1e-3, "alp " + fmt(alp) + " < -1e-3");
            c.require(alp <= 0.0, "alp positive");
            c.require(accuracy == 100.0, "accuracy " + fmt(accuracy) + " != 100");
            c.detail = "alp=" + fmt(alp) + ", acc=" + fmt(accuracy);
        }
    }
    const double elapsed = seconds_since(start);
    c.require(elapsed < 5.0, "took " + fmt(elapsed) + "s (limit 5s)");
    c.finish();
}

void criterion_2_scenario_ordering() {
    Criterion c{2, "scenario ordering with partial scenario inside the reference window", true, ""};
    const auto start = std::chrono::steady_clock::now();
    double alp[3] = {0, 0, 0}, acc[3] = {0, 0, 0};
    const char* kinds[3] = {"separated", "partial", "overlap"};
    for (int i = 0; i < 3 && c.ok; ++i) {
        const std::string prefix = (g_dir / ("c2_" + std::string(kinds[i]))).string();
        const auto synth = run_cli("synth --kind " + std::string(kinds[i]) +
                                   " --k 10 --dim 2 --n-per 1000 --seed 2025 --out-prefix " +
                                   prefix);
        c.require(synth.exit_code == 0, std::string(kinds[i]) + " synth failed");
        if (!c.ok) break;
        const auto eval = run_cli("eval --embeddings " + prefix + ".embeddings.csv --clusters " +
                                  prefix + ".clusters.csv --reg diag --clip-eps 1e-6");
        c.require(eval.exit_code == 0, std::string(kinds[i]) + " eval failed");
        if (!c.ok) break;
        const auto report = json::parse(eval.out);
        alp[i] = report["alp"].get<double>();
        acc[i] = report["accuracy"].get<double>();
    }
    if (c.ok) {
        c.require(alp[0] > alp[1] && alp[1] > alp[2], "ALP ordering violated");
        c.require(acc[0] >= acc[1] && acc[1] >= acc[2], "accuracy ordering violated");
        c.require(alp[1] >= -0.6 && alp[1] <= -0.15,
                  "partial alp " + fmt(alp[1]) + " outside [-0.6,-0.15]");
        c.require(acc[1] >= 80.0 && acc[1] <= 95.0,
                  "partial accuracy " + fmt(acc[1]) + " outside [80,95]");
        c.detail = "alp=" + fmt(alp[0]) + "/" + fmt(alp[1]) + "/" + fmt(alp[2]) +
                   ", acc=" + fmt(acc[0]) + "/" + fmt(acc[1]) + "/" + fmt(acc[2]);
    }
    const double elapsed = seconds_since(start);
    c.require(elapsed < 10.0, "took " + fmt(elapsed) + "s (limit 10s)");
    c.finish();
}

void criterion_3_posterior_oracle() {
    Criterion c{3, "posterior and ALP match the brute-force oracle within 1e-8", true, ""};
    rng::Stream stream(301, rng::stream_id(rng::kStreamTest, 70));
    const RegularizationMode modes[] = {RegularizationMode::diagonal(),
                                        RegularizationMode::tikhonov(1e-3),
                                        RegularizationMode::auto_eps()};
    double worst = 0.0;
    for (int trial = 0; trial < 50 && c.ok; ++trial) {
        const int m = 1 + static_cast<int>(stream.uniform_below(4));
        const int d = 1 + static_cast<int>(stream.uniform_below(3));
        const int n = std::max(m * (d + 2), 10) + static_cast<int>(stream.uniform_below(190));
        Eigen::MatrixXd pts(n, d);
        std::vector<int> assign(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            assign[static_cast<std::size_t>(i)] = i % m;
            for (int j = 0; j < d; ++j) pts(i, j) = stream.next_normal() * 1.5 + 2.0 * (i % m);
        }
        EmbeddingSet emb;
        emb.matrix = pts;
        emb.name = "c3";
        for (int i = 0; i < n; ++i) emb.ids.push_back(std::to_string(i));
        Clustering clust;
        clust.assignment = assign;
        clust.m = m;
        clust.criterion = "c3";

        const auto model = fit_cluster_model(emb, clust, modes[trial % 3]);
        std::vector<oracle::Component> comps;
        for (const auto& comp : model.components)
            comps.push_back({comp.mean, comp.covariance, std::exp(comp.log_weight)});

        for (int probe = 0; probe < 4; ++probe) {
            Eigen::VectorXd x(d);
            for (int j = 0; j < d; ++j) x(j) = stream.next_normal() * 2.0 + probe;
            const auto mine = posterior(model, x);
            const auto ref = oracle::posterior(comps, x);
            for (int k = 0; k < m; ++k)
                worst = std::max(worst,
                                 std::abs(mine(k) - ref[static_cast<std::size_t>(k)]));
        }
        const auto report = alp_score(model, emb, clust, 0.0);
        const auto ref = oracle::alp(comps, pts, assign);
        worst = std::max(worst, std::abs(report.alp - ref.alp));
        c.require(std::abs(report.accuracy - ref.accuracy) < 1e-12, "accuracy mismatch");
    }
    c.require(worst <= 1e-8, "max deviation " + fmt(worst));
    if (c.ok) c.detail = "max |impl - oracle| = " + fmt(worst) + " over 50 instances";
    c.finish();
}

void criterion_4_auto_epsilon() {
    Criterion c{4, "eigenvalue-cutoff regularizer worked examples within 1e-12", true, ""};
    {
        Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
        cov.diagonal() << 4.0, 1.0, 1e-12;
        c.require(std::abs(auto_epsilon(cov) - 4.0 / 30.0) <= 1e-12 * (4.0 / 30.0) + 1e-15,
                  "diag(4,1,1e-12) epsilon");
    }
    c.require(std::abs(auto_epsilon(Eigen::MatrixXd::Identity(2, 2)) - 0.05) <= 1e-12,
              "identity epsilon");
    c.require(auto_epsilon(Eigen::MatrixXd::Zero(2, 2)) == 1e-8, "zero-matrix floor");

    rng::Stream stream(401, rng::stream_id(rng::kStreamTest, 71));
    for (int trial = 0; trial < 40; ++trial) {
        const int d = 1 + static_cast<int>(stream.uniform_below(8));
        const int rank =
            1 + static_cast<int>(stream.uniform_below(static_cast<std::uint64_t>(d)));
        Eigen::MatrixXd b(d, rank);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < rank; ++j) b(i, j) = stream.next_normal();
        Eigen::MatrixXd cov = b * b.transpose();
        if (trial % 7 == 0) cov.setZero();
        for (const auto& mode :
             {RegularizationMode::diagonal(), RegularizationMode::tikhonov(1e-9),
              RegularizationMode::auto_eps()}) {
            const auto [reg, applied] = regularize(cov, mode);
            Eigen::LLT<Eigen::MatrixXd> llt(reg);
            c.require(llt.info() == Eigen::Success, "Cholesky failed post-regularization");
            (void)applied;
        }
    }
    c.finish();
}

void criterion_5_tree() {
    Criterion c{5, "tree recovers the blob partition, reruns byte-identical, argmax unchanged", true, ""};
    // 4 blobs tagged by 2 binary features
    EmbeddingSet emb;
    FeatureTable feats;
    std::vector<int> blob;
    {
        rng::Stream stream(501, rng::stream_id(rng::kStreamTest, 72));
        const int per = 60;
        emb.matrix.resize(4 * per, 2);
        FeatureColumn xpos, ypos;
        xpos.name = "xpos";
        ypos.name = "ypos";
        for (int i = 0; i < 4 * per; ++i) {
            const int b = i % 4;
            blob.push_back(b);
            emb.matrix(i, 0) = ((b & 1) ? 10.0 : -10.0) + stream.next_normal();
            emb.matrix(i, 1) = ((b & 2) ? 10.0 : -10.0) + stream.next_normal();
            emb.ids.push_back("p" + std::to_string(i));
            xpos.values.push_back((b & 1) ? "1" : "0");
            ypos.values.push_back((b & 2) ? "1" : "0");
        }
        xpos.categories = {"0", "1"};
        ypos.categories = {"0", "1"};
        feats.ids = emb.ids;
        feats.columns = {xpos, ypos};
    }
    TreeParams params;
    params.max_depth = 2;
    params.min_node_size = 50;
    const auto tree = build_tree(emb, feats, params, RegularizationMode::diagonal());
    const auto clustering = leaf_clustering(tree);
    c.require(clustering.m == 4, "expected 4 leaves, got " + std::to_string(clustering.m));
    if (clustering.m == 4) {
        // leaf partition equals the blob partition up to relabeling
        std::vector<std::set<int>> leaf_blobs(4);
        for (std::size_t i = 0; i < blob.size(); ++i)
            leaf_blobs[static_cast<std::size_t>(clustering.assignment[i])].insert(
                blob[static_cast<std::size_t>(i)]);
        std::set<int> seen;
        for (const auto& s : leaf_blobs) {
            c.require(s.size() == 1, "leaf mixes blobs");
            seen.insert(*s.begin());
        }
        c.require(seen.size() == 4, "leaves do not cover all blobs");
    }

    // byte-identical rerun through the CLI
    const auto emb_path = (g_dir / "c5_emb.csv").string();
    write_embeddings_csv(emb, emb_path);
    std::string feats_text = "id,xpos,ypos\n";
    for (std::size_t i = 0; i < emb.ids.size(); ++i)
        feats_text += emb.ids[i] + "," + feats.columns[0].values[i] + "," +
                      feats.columns[1].values[i] + "\n";
    {
        std::ofstream out(g_dir / "c5_feats.csv", std::ios::binary);
        out << feats_text;
    }
    const std::string tree_a = (g_dir / "c5_tree_a.json").string();
    const std::string tree_b = (g_dir / "c5_tree_b.json").string();
    for (const auto& [tree_path, clusters_name] :
         {std::pair{tree_a, "c5_cl_a.csv"}, std::pair{tree_b, "c5_cl_b.csv"}}) {
        const auto result = run_cli("tree --embeddings " + emb_path + " --features " +
                                    (g_dir / "c5_feats.csv").string() +
                                    " --max-depth 2 --min-node 50 --reg diag --out-tree " +
                                    tree_path + " --out-clusters " +
                                    (g_dir / clusters_name).string());
        c.require(result.exit_code == 0, "tree command failed");
    }
    c.require(slurp(tree_a) == slurp(tree_b), "tree JSON differs between reruns");
    c.require(slurp(g_dir / "c5_cl_a.csv") == slurp(g_dir / "c5_cl_b.csv"),
              "clusters CSV differs between reruns");

    // omitting the shared normalization term never changes the selection
    rng::Stream stream(502, rng::stream_id(rng::kStreamTest, 73));
    for (int node = 0; node < 20; ++node) {
        const int n = 60 + static_cast<int>(stream.uniform_below(140));
        const int q = 3 + static_cast<int>(stream.uniform_below(5));
        Eigen::MatrixXd pts(n, 2);
        for (int i = 0; i < n; ++i) {
            pts(i, 0) = stream.next_normal() * 2.0;
            pts(i, 1) = stream.next_normal() * 2.0;
        }
        std::vector<std::vector<std::uint8_t>> columns(static_cast<std::size_t>(q));
        for (auto& col : columns) {
            col.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                col[static_cast<std::size_t>(i)] =
                    static_cast<std::uint8_t>(stream.uniform_below(2));
        }
        std::vector<double> log_joints;
        const auto best = best_split(pts, columns, RegularizationMode::diagonal(),
                                     FeaturePrior::uniform(columns.size()), 5, 1, &log_joints);
        if (!best.has_value()) continue;
        double top = -std::numeric_limits<double>::infinity();
        for (const double s : log_joints) top = std::max(top, s);
        double sum = 0.0;
        for (const double s : log_joints)
            if (std::isfinite(s)) sum += std::exp(s - top);
        const double lse = top + std::log(sum);
        int argmax = -1;
        double best_normalized = -std::numeric_limits<double>::infinity();
        for (std::size_t f = 0; f < log_joints.size(); ++f) {
            if (!std::isfinite(log_joints[f])) continue;
            if (log_joints[f] - lse > best_normalized) {
                best_normalized = log_joints[f] - lse;
                argmax = static_cast<int>(f);
            }
        }
        c.require(argmax == best->feature_index, "normalized argmax differs");
    }
    c.finish();
}

void criterion_6_multihead() {
    Criterion c{6, "multi-head degeneracy, bit-reproducibility, parallel == serial", true, ""};
    const auto spec = scenario_spec(ScenarioKind::Partial, 6, 5, 150, 61);
    const auto [emb, truth] = generate(spec);

    const auto model = fit_cluster_model(emb, truth, RegularizationMode::diagonal());
    const auto plain = alp_score(model, emb, truth, 1e-6);
    const auto degenerate = mean_alp_multihead(emb, truth, RegularizationMode::diagonal(),
                                               static_cast<int>(emb.dim()), 1, 99, 1e-6);
    c.require(std::abs(degenerate.mean_alp - plain.alp) <= 1e-12,
              "v=d single head deviates from plain ALP");
    c.require(std::abs(degenerate.mean_accuracy - plain.accuracy) <= 1e-12,
              "v=d single head accuracy deviates");

    const auto a =
        mean_alp_multihead(emb, truth, RegularizationMode::diagonal(), 2, 4, 7, 1e-6, false, 1);
    const auto b =
        mean_alp_multihead(emb, truth, RegularizationMode::diagonal(), 2, 4, 7, 1e-6, false, 1);
    c.require(a.mean_alp == b.mean_alp && a.mean_accuracy == b.mean_accuracy,
              "fixed-seed rerun differs");
    for (std::size_t h = 0; h < a.head_reports.size(); ++h) {
        c.require(a.head_reports[h].dims == b.head_reports[h].dims, "head dims differ");
        c.require(a.head_reports[h].report.alp == b.head_reports[h].report.alp,
                  "head alp differs");
    }
    const auto parallel =
        mean_alp_multihead(emb, truth, RegularizationMode::diagonal(), 2, 4, 7, 1e-6, false, 8);
    c.require(std::abs(parallel.mean_alp - a.mean_alp) <= 1e-12, "parallel mean_alp deviates");
    c.require(std::abs(parallel.mean_accuracy - a.mean_accuracy) <= 1e-12,
              "parallel mean_accuracy deviates");
    c.detail = "mean_alp=" + fmt(a.mean_alp);
    c.finish();
}

void criterion_7_clipping() {
    Criterion c{7, "clipping bounds a single 1e6-sigma outlier", true, ""};
    const auto spec = scenario_spec(ScenarioKind::Separated, 10, 2, 100, 71);
    const auto [emb, truth] = generate(spec);
    const auto n = static_cast<double>(emb.n());
    const auto model = fit_cluster_model(emb, truth, RegularizationMode::diagonal());

    EmbeddingSet dirty = emb;
    dirty.matrix(0, 0) = 20.0 - 1e6;  // cluster 0 mean is (20,0); drag across the circle
    dirty.matrix(0, 1) = 0.0;

    const double clean_clipped = alp_score(model, emb, truth, 1e-6).alp;
    const double clean_raw = alp_score(model, emb, truth, 0.0).alp;
    const double dirty_clipped = alp_score(model, dirty, truth, 1e-6).alp;
    const double dirty_raw = alp_score(model, dirty, truth, 0.0).alp;

    const double delta_clipped = std::abs(dirty_clipped - clean_clipped);
    const double delta_raw = std::abs(dirty_raw - clean_raw);
    c.require(delta_clipped < 10.0 / n,
              "clip_eps=1e-6 delta " + fmt(delta_clipped) + " >= " + fmt(10.0 / n));
    c.require(delta_raw > 100.0 / n,
              "clip_eps=0 delta " + fmt(delta_raw) + " <= " + fmt(100.0 / n));
    c.detail = "delta(1e-6)=" + fmt(delta_clipped) + ", delta(0)=" + fmt(delta_raw);
    c.finish();
}

void criterion_8_probe_gradient() {
    Criterion c{8, "probe gradients match finite differences; separable fixture >= 99%", true, ""};
    rng::Stream stream(801, rng::stream_id(rng::kStreamTest, 74));
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 5 + static_cast<int>(stream.uniform_below(46));
        const int d = 1 + static_cast<int>(stream.uniform_below(5));
        const int m = 2 + static_cast<int>(stream.uniform_below(2));
        Eigen::MatrixXd z(n, d);
        std::vector<int> labels(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            labels[static_cast<std::size_t>(i)] = i % m;
            for (int j = 0; j < d; ++j) z(i, j) = stream.next_normal();
        }
        Eigen::MatrixXd w(m, d);
        Eigen::VectorXd bias(m);
        for (int k = 0; k < m; ++k) {
            bias(k) = 0.3 * stream.next_normal();
            for (int j = 0; j < d; ++j) w(k, j) = 0.5 * stream.next_normal();
        }
        Eigen::MatrixXd grad_w;
        Eigen::VectorXd grad_b;
        probe_gradient(z, labels, w, bias, 1e-4, grad_w, grad_b);

        double num_sq = 0.0, diff_sq = 0.0;
        const double h = 1e-6;
        auto fd_check = [&](double* param, double analytic) {
            const double saved = *param;
            *param = saved + h;
            const double up = probe_loss(z, labels, w, bias, 1e-4);
            *param = saved - h;
            const double down = probe_loss(z, labels, w, bias, 1e-4);
            *param = saved;
            const double fd = (up - down) / (2.0 * h);
            num_sq += fd * fd;
            diff_sq += (fd - analytic) * (fd - analytic);
        };
        for (int k = 0; k < m; ++k)
            for (int j = 0; j < d; ++j) fd_check(&w(k, j), grad_w(k, j));
        for (int k = 0; k < m; ++k) fd_check(&bias(k), grad_b(k));
        worst = std::max(worst, std::sqrt(diff_sq) / std::max(std::sqrt(num_sq), 1e-12));
    }
    c.require(worst <= 1e-5, "relative gradient error " + fmt(worst));

    // separable two-cluster fixture
    Eigen::MatrixXd pts(100, 1);
    std::vector<int> assign(100);
    for (int i = 0; i < 100; ++i) {
        const bool second = i >= 50;
        pts(i, 0) = (second ? 10.0 : -10.0) + stream.next_normal();
        assign[static_cast<std::size_t>(i)] = second ? 1 : 0;
    }
    EmbeddingSet emb;
    emb.matrix = pts;
    for (int i = 0; i < 100; ++i) emb.ids.push_back(std::to_string(i));
    Clustering labels;
    labels.assignment = assign;
    labels.m = 2;
    ProbeConfig config;
    config.epochs = 200;
    config.learning_rate = 0.1;
    const auto probe = train_linear_probe(emb, labels, config);
    const double accuracy = probe_accuracy(probe, emb, labels);
    c.require(accuracy >= 99.0, "separable accuracy " + fmt(accuracy));
    c.detail = "grad rel err=" + fmt(worst) + ", separable acc=" + fmt(accuracy);
    c.finish();
}

void criterion_9_correlation_values() {
    Criterion c{9, "correlation worked examples and undefined handling", true, ""};
    c.require(std::abs(*pearson({1, 2, 3}, {1, 3, 2}).pearson_r - 0.5) <= 1e-12,
              "pearson 0.5 case");
    c.require(std::abs(*spearman({1, 2, 3}, {1, 3, 2}).spearman_rho - 0.5) <= 1e-12,
              "spearman 0.5 case");
    c.require(std::abs(*pearson({1, 2, 3}, {2, 4, 6}).pearson_r - 1.0) <= 1e-12,
              "linear case");
    c.require(std::abs(*pearson({1, 2, 3}, {6, 4, 2}).pearson_r - (-1.0)) <= 1e-12,
              "antilinear case");
    const auto flat = pearson({1, 2, 3}, {7, 7, 7});
    c.require(!flat.pearson_r.has_value() && flat.undefined_reason.has_value(),
              "zero-variance pearson must be undefined");
    const auto flat_s = spearman({1, 2, 3}, {7, 7, 7});
    c.require(!flat_s.spearman_rho.has_value() && flat_s.undefined_reason.has_value(),
              "zero-variance spearman must be undefined");
    c.finish();
}

void criterion_10_comparison() {
    Criterion c{10, "cross-embedding comparison sanity", true, ""};
    const auto spec = scenario_spec(ScenarioKind::Separated, 10, 2, 150, 101);
    const auto [emb, truth] = generate(spec);
    const auto same =
        compare_embeddings(emb, emb, truth, truth, RegularizationMode::diagonal(), 1e-6);
    c.require(same.alp_aa == same.alp_ab && same.alp_aa == same.alp_ba &&
                  same.alp_aa == same.alp_bb,
              "A=B should give four equal scores");

    EmbeddingSet noisy = emb;
    rng::Stream noise(102, rng::stream_id(rng::kStreamTest, 75));
    for (long long i = 0; i < noisy.n(); ++i)
        for (long long j = 0; j < noisy.dim(); ++j)
            noisy.matrix(i, j) += 10.0 * noise.next_normal();
    const auto degraded =
        compare_embeddings(emb, noisy, truth, truth, RegularizationMode::diagonal(), 1e-6);
    c.require(degraded.alp_aa > degraded.alp_ab, "ALP_S^A must beat ALP_S^B");
    c.detail = "alp_S^A=" + fmt(degraded.alp_aa) + ", alp_S^B=" + fmt(degraded.alp_ab);
    c.finish();
}

void criterion_11_scale() {
    Criterion c{11, "N=100000, d=128, m=10 diagonal evaluation under 60 s", true, ""};
    const auto spec = scenario_spec(ScenarioKind::Separated, 10, 128, 10000, 111);
    const auto [emb, truth] = generate(spec);

    const auto start = std::chrono::steady_clock::now();
    const auto model = fit_cluster_model(emb, truth, RegularizationMode::diagonal(), std::nullopt,
                                         0 /* all cores */);
    const auto report = alp_score(model, emb, truth, 1e-6, 0);
    const double elapsed = seconds_since(start);
    c.require(elapsed < 60.0, "took " + fmt(elapsed) + "s");
    c.require(report.n_total == 100000, "unexpected N");
    c.detail = fmt(elapsed) + "s, alp=" + fmt(report.alp);
    c.finish();
}

void criterion_12_layers_correlation() {
    Criterion c{12, "synthetic layers: pearson(ALP, probe accuracy) > 0.9", true, ""};
    const auto spec = scenario_spec(ScenarioKind::Separated, 10, 2, 200, 121);
    const auto [emb, truth] = generate(spec);
    rng::Stream noise(122, rng::stream_id(rng::kStreamTest, 76));

    std::vector<double> alp_series, acc_series;
    for (const double scale : {0.0, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        EmbeddingSet layer = emb;
        for (long long i = 0; i < layer.n(); ++i)
            for (long long j = 0; j < layer.dim(); ++j)
                layer.matrix(i, j) += scale * noise.next_normal();
        const auto model = fit_cluster_model(layer, truth, RegularizationMode::diagonal());
        alp_series.push_back(alp_score(model, layer, truth, 1e-6).alp);

        ProbeConfig config;
        config.epochs = 150;
        config.learning_rate = 0.1;
        const auto probe = train_linear_probe(layer, truth, config);
        acc_series.push_back(probe_accuracy(probe, layer, truth));
    }
    const auto result = pearson(alp_series, acc_series);
    c.require(result.pearson_r.has_value(), "correlation undefined");
    if (result.pearson_r.has_value()) {
        c.require(*result.pearson_r > 0.9, "pearson " + fmt(*result.pearson_r));
        c.detail = "pearson=" + fmt(*result.pearson_r);
    }
    c.finish();
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) {
        g_cli = argv[1];
    } else if (const char* env = std::getenv("EMBEVAL_BIN")) {
        g_cli = env;
    } else {
        std::cerr << "usage: acceptance <path-to-embeval-cli>\n";
        return 2;
    }
    g_dir = fs::temp_directory_path() / ("embeval-acceptance-" + std::to_string(::getpid()));
    fs::create_directories(g_dir);

    criterion_1_separated_reproduction();
    criterion_2_scenario_ordering();
    criterion_3_posterior_oracle();
    criterion_4_auto_epsilon();
    criterion_5_tree();
    criterion_6_multihead();
    criterion_7_clipping();
    criterion_8_probe_gradient();
    criterion_9_correlation_values();
    criterion_10_comparison();
    criterion_11_scale();
    criterion_12_layers_correlation();

    std::error_code ec;
    fs::remove_all(g_dir, ec);

    if (g_failures == 0) {
        std::cout << "all criteria passed\n";
        return 0;
    }
    std::cout << g_failures << " criterion(s) failed\n";
    return 1;
}
