#pragma once

// Implementation of the CLI subcommands, kept in the library so the
// pipeline can be driven (and tested) without going through argv.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "umccev/clustering.hpp"
#include "umccev/datasets.hpp"
#include "umccev/metrics.hpp"
#include "umccev/solver.hpp"

namespace umccev {

/// Decade ladder used for the trade-off sensitivity sweeps: 2e-5 ... 2e3.
inline std::vector<double> lambda_ladder() {
    return {2e-5, 2e-4, 2e-3, 2e-2, 2e-1, 2.0, 2e1, 2e2, 2e3};
}

/// Independent 64-bit seed for repeat `index` of a run seeded with `base`.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(base), static_cast<std::uint32_t>(base >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t words[2];
    seq.generate(std::begin(words), std::end(words));
    return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

struct MetricSummary {
    std::string name;
    std::vector<double> runs;
    double mean = 0.0;
    double std = 0.0;  // population standard deviation; 0 for a single run
};

inline MetricSummary summarize(std::string name, std::vector<double> runs) {
    MetricSummary s{std::move(name), std::move(runs), 0.0, 0.0};
    if (s.runs.empty()) return s;
    for (double x : s.runs) s.mean += x;
    s.mean /= static_cast<double>(s.runs.size());
    double ss = 0.0;
    for (double x : s.runs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(s.runs.size()));
    return s;
}

/// Solver output plus `repeats` spectral clusterings of the fused affinity.
struct PipelineOutcome {
    SolverResult solver;
    Matrix affinity;
    std::vector<Labels> labels;
    std::vector<MetricSet> metrics;  // empty when the dataset has no labels
    std::vector<MetricSummary> summary;
};

/// The solver is deterministic, so it runs once; the repeats differ only in
/// the k-means seeding of the final spectral clustering.
inline PipelineOutcome run_pipeline(const MultiViewDataset& data, const SolverConfig& cfg, int repeats) {
    if (repeats < 1) throw InvalidInput("repeats must be >= 1");
    PipelineOutcome out;
    out.solver = run(data, cfg);
    const auto& st = out.solver.state;
    out.affinity = fuse_affinity(st.Z, cfg.variant == Variant::MlrrAgr ? std::vector<Matrix>{} : st.U);
    for (int r = 0; r < repeats; ++r) {
        out.labels.push_back(spectral_cluster(out.affinity, data.clusters, derive_seed(cfg.seed, r)));
        if (data.labels) out.metrics.push_back(evaluate(out.labels.back(), *data.labels));
    }
    if (!out.metrics.empty()) {
        const auto& names = metric_names();
        for (std::size_t k = 0; k < names.size(); ++k) {
            std::vector<double> runs;
            for (const auto& m : out.metrics) runs.push_back(as_vector(m)[k]);
            out.summary.push_back(summarize(names[k], std::move(runs)));
        }
    }
    return out;
}

namespace detail {

inline std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

}  // namespace detail

inline std::string format_trace(const IterationTrace& trace) {
    std::string out = "iter,r_zs,r_u1,r_u2,r_recon,objective\n";
    for (const auto& r : trace) {
        out += std::to_string(r.iter) + "," + detail::fmt(r.r_zs) + "," + detail::fmt(r.r_u1) + "," +
               detail::fmt(r.r_u2) + "," + detail::fmt(r.r_recon) + "," + detail::fmt(r.objective) + "\n";
    }
    return out;
}

inline std::string format_config(const SolverConfig& cfg) {
    std::string out;
    const auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
    kv("variant", to_string(cfg.variant));
    kv("lambda1", detail::fmt(cfg.lambda1));
    kv("lambda2", detail::fmt(cfg.lambda2));
    kv("lambda3", detail::fmt(cfg.lambda3));
    kv("eta", detail::fmt(cfg.eta));
    kv("gamma", detail::fmt(cfg.gamma));
    kv("mu", detail::fmt(cfg.mu));
    kv("mu1", detail::fmt(cfg.mu1));
    kv("mu2", detail::fmt(cfg.mu2));
    kv("rho1", detail::fmt(cfg.rho1));
    kv("mu_max", detail::fmt(cfg.mu_max));
    kv("grow_mu", cfg.grow_mu ? "true" : "false");
    kv("max_iter", std::to_string(cfg.max_iter));
    kv("tol", detail::fmt(cfg.tol));
    kv("knn_k", std::to_string(cfg.knn_k));
    kv("printed_updates", cfg.printed_updates ? "true" : "false");
    kv("seed", std::to_string(cfg.seed));
    return out;
}

inline std::string format_metrics(const MetricSet& m) {
    std::string out;
    const auto& names = metric_names();
    const auto values = as_vector(m);
    for (std::size_t k = 0; k < names.size(); ++k) out += names[k] + " = " + detail::fmt(values[k]) + "\n";
    return out;
}

struct ClusterOptions {
    std::filesystem::path manifest;
    SolverConfig config;
    int repeats = 10;
    std::filesystem::path out_dir = "umccev_out";
};

struct RunReport {
    SolverConfig config;
    int repeats = 1;
    Eigen::Index samples = 0;
    std::size_t views = 0;
    int clusters = 0;
    int iterations = 0;
    double final_max_residual = 0.0;
    double wall_seconds = 0.0;
    std::vector<MetricSummary> metrics;
    std::filesystem::path report_path;
    std::filesystem::path affinity_path;
    std::filesystem::path trace_path;
    std::vector<std::filesystem::path> label_paths;

    std::string format() const {
        std::string out = "# umccev cluster report\n";
        out += format_config(config);
        const auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
        kv("repeats", std::to_string(repeats));
        kv("samples", std::to_string(samples));
        kv("views", std::to_string(views));
        kv("clusters", std::to_string(clusters));
        kv("iterations", std::to_string(iterations));
        kv("final_max_residual", detail::fmt(final_max_residual));
        kv("wall_time_seconds", detail::fmt(wall_seconds));
        kv("artifact.affinity", affinity_path.filename().string());
        kv("artifact.trace", trace_path.filename().string());
        for (std::size_t r = 0; r < label_paths.size(); ++r)
            kv("artifact.labels." + std::to_string(r), label_paths[r].filename().string());
        for (const auto& m : metrics) {
            kv("metric." + m.name + ".mean", detail::fmt(m.mean));
            kv("metric." + m.name + ".std", detail::fmt(m.std));
            std::string runs;
            for (std::size_t r = 0; r < m.runs.size(); ++r) runs += (r ? "," : "") + detail::fmt(m.runs[r]);
            kv("metric." + m.name + ".runs", runs);
        }
        return out;
    }
};

/// Loads the manifest, runs the pipeline and writes labels_<r>.txt,
/// affinity.csv, trace.csv and report.txt into the output directory.
inline RunReport cmd_cluster(const ClusterOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const MultiViewDataset data = load_manifest(opt.manifest);
    const PipelineOutcome outcome = run_pipeline(data, opt.config, opt.repeats);
    detail::ensure_dir(opt.out_dir);

    RunReport rep;
    rep.config = opt.config;
    rep.repeats = opt.repeats;
    rep.samples = data.samples();
    rep.views = data.view_count();
    rep.clusters = data.clusters;
    rep.iterations = static_cast<int>(outcome.solver.trace.size());
    rep.final_max_residual = outcome.solver.trace.empty() ? 0.0 : outcome.solver.trace.back().max_residual();
    rep.metrics = outcome.summary;

    for (std::size_t r = 0; r < outcome.labels.size(); ++r) {
        rep.label_paths.push_back(opt.out_dir / ("labels_" + std::to_string(r) + ".txt"));
        save_labels(outcome.labels[r], rep.label_paths.back());
    }
    rep.affinity_path = opt.out_dir / "affinity.csv";
    save_matrix(outcome.affinity, rep.affinity_path);
    rep.trace_path = opt.out_dir / "trace.csv";
    write_file_atomic(rep.trace_path, format_trace(outcome.solver.trace));

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep.report_path = opt.out_dir / "report.txt";
    write_file_atomic(rep.report_path, rep.format());
    return rep;
}

/// Writes view<v>.csv, labels.txt and manifest.txt; returns the manifest path.
inline std::filesystem::path cmd_synth(const SynthSpec& spec, const std::filesystem::path& out_dir) {
    const MultiViewDataset data = synth_multiview(spec);
    detail::ensure_dir(out_dir);
    std::string manifest = "# synthetic union-of-subspaces data, seed " + std::to_string(spec.seed) + "\n";
    for (std::size_t v = 0; v < data.views.size(); ++v) {
        const std::string name = "view" + std::to_string(v) + ".csv";
        save_matrix(data.views[v], out_dir / name);
        manifest += "view = " + name + "\n";
    }
    save_labels(*data.labels, out_dir / "labels.txt");
    manifest += "labels = labels.txt\n";
    manifest += "clusters = " + std::to_string(data.clusters) + "\n";
    manifest += "samples = " + std::to_string(data.samples()) + "\n";
    manifest += "normalize = unit\n";
    const auto path = out_dir / "manifest.txt";
    write_file_atomic(path, manifest);
    return path;
}

inline MetricSet cmd_eval(const std::filesystem::path& pred_path, const std::filesystem::path& truth_path) {
    const Labels pred = load_labels(pred_path);
    const Labels truth = load_labels(truth_path);
    if (pred.size() != truth.size())
        throw DimensionMismatchError(pred_path.string() + " has " + std::to_string(pred.size()) + " labels but " +
                                     truth_path.string() + " has " + std::to_string(truth.size()));
    if (pred.size() < 2) throw InvalidInput("evaluation needs at least two samples");
    return evaluate(pred, truth);
}

struct SweepOptions {
    std::filesystem::path manifest;
    SolverConfig config;
    std::string parameter = "lambda1";  // lambda1 | lambda2 | lambda3
    std::vector<double> values = lambda_ladder();
    int repeats = 10;
    std::filesystem::path out_dir = "umccev_sweep";
};

struct SweepRow {
    double value = 0.0;
    int iterations = 0;
    std::vector<MetricSummary> metrics;
};

struct SweepResult {
    std::filesystem::path table_path;
    std::vector<SweepRow> rows;
};

/// One row per grid value with the mean of every metric over the repeats.
inline SweepResult cmd_sweep(const SweepOptions& opt) {
    if (opt.values.empty()) throw InvalidInput("sweep grid is empty");
    double SolverConfig::*field = nullptr;
    if (opt.parameter == "lambda1") field = &SolverConfig::lambda1;
    else if (opt.parameter == "lambda2") field = &SolverConfig::lambda2;
    else if (opt.parameter == "lambda3") field = &SolverConfig::lambda3;
    else throw InvalidInput("sweep parameter must be lambda1, lambda2 or lambda3, got '" + opt.parameter + "'");

    const MultiViewDataset data = load_manifest(opt.manifest);
    if (!data.labels) throw InvalidInput("sweep requires a manifest with labels");
    detail::ensure_dir(opt.out_dir);

    SweepResult res;
    std::string table = "param,value";
    for (const auto& name : metric_names()) table += "," + name;
    table += ",iterations\n";
    for (double value : opt.values) {
        SolverConfig cfg = opt.config;
        cfg.*field = value;
        const PipelineOutcome outcome = run_pipeline(data, cfg, opt.repeats);
        SweepRow row{value, static_cast<int>(outcome.solver.trace.size()), outcome.summary};
        table += opt.parameter + "," + detail::fmt(value);
        for (const auto& m : row.metrics) table += "," + detail::fmt(m.mean);
        table += "," + std::to_string(row.iterations) + "\n";
        res.rows.push_back(std::move(row));
    }
    res.table_path = opt.out_dir / ("sweep_" + opt.parameter + ".csv");
    write_file_atomic(res.table_path, table);
    return res;
}

}  // namespace umccev
