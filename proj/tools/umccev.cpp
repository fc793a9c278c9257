#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "umccev/umccev.hpp"

namespace {

struct SolverFlags {
    umccev::SolverConfig cfg;
    std::string variant = "umc-cev";
    bool fixed_mu = false;

    void attach(CLI::App& app) {
        app.add_option("--lambda1", cfg.lambda1, "weight of the low-rank + sparse penalty on U")
            ->capture_default_str();
        app.add_option("--lambda2", cfg.lambda2, "weight of the spectral term")->capture_default_str();
        app.add_option("--lambda3", cfg.lambda3, "weight of the error nuclear norm")->capture_default_str();
        app.add_option("--eta", cfg.eta, "Z <-> U coupling weight")->capture_default_str();
        app.add_option("--gamma", cfg.gamma, "firm-threshold shape in (0, 1]")->capture_default_str();
        app.add_option("--mu", cfg.mu, "initial penalty on X = XZ + E and Z = S")->capture_default_str();
        app.add_option("--mu1", cfg.mu1, "initial penalty on U = U1")->capture_default_str();
        app.add_option("--mu2", cfg.mu2, "initial penalty on U = U2")->capture_default_str();
        app.add_option("--rho1", cfg.rho1, "penalty growth factor")->capture_default_str();
        app.add_option("--mu-max", cfg.mu_max, "penalty cap")->capture_default_str();
        app.add_option("--knn", cfg.knn_k, "k of the initial k-NN graph (0 = max(5, c+1))")->capture_default_str();
        app.add_option("--variant", variant, "model variant")
            ->check(CLI::IsMember({"umc-cev", "ml0-lssc", "mlrr-agr"}))
            ->capture_default_str();
        app.add_option("--max-iter", cfg.max_iter, "iteration cap")->capture_default_str();
        app.add_option("--tol", cfg.tol, "residual tolerance")->capture_default_str();
        app.add_option("--seed", cfg.seed, "base seed")->capture_default_str();
        app.add_flag("--printed-updates", cfg.printed_updates, "use the alternative non-stationary Z/U/E update forms");
        app.add_flag("--fixed-mu", fixed_mu, "keep mu constant instead of growing it with rho1");
        app.set_config("--config", "", "key = value file with any of these options (flags take precedence)");
    }

    umccev::SolverConfig resolve() const {
        umccev::SolverConfig out = cfg;
        out.variant = umccev::parse_variant(variant);
        out.grow_mu = !fixed_mu;
        out.validate();
        return out;
    }
};

std::vector<double> parse_values(const std::string& csv) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        const auto comma = csv.find(',', start);
        out.push_back(umccev::detail::parse_double(csv.substr(start, comma - start), "--values"));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

void print_summary(const std::vector<umccev::MetricSummary>& metrics) {
    for (const auto& m : metrics)
        std::cout << m.name << " = " << m.mean << " +- " << m.std << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-view subspace clustering with coupled self-expressive decompositions"};
    app.require_subcommand(1);

    auto* cluster = app.add_subcommand("cluster", "run the solver and spectral clustering on a dataset");
    SolverFlags cluster_flags;
    umccev::ClusterOptions cluster_opt;
    cluster->add_option("--manifest", cluster_opt.manifest, "dataset manifest")->required();
    cluster->add_option("--repeats", cluster_opt.repeats, "clustering repeats")->capture_default_str();
    cluster->add_option("--out", cluster_opt.out_dir, "output directory")->capture_default_str();
    cluster_flags.attach(*cluster);

    auto* synth = app.add_subcommand("synth", "write a synthetic union-of-subspaces dataset");
    umccev::SynthSpec synth_spec;
    std::string synth_out = "synth";
    synth->add_option("--clusters", synth_spec.clusters)->capture_default_str();
    synth->add_option("--per-cluster", synth_spec.samples_per_cluster)->capture_default_str();
    synth->add_option("--dims", synth_spec.ambient_dims, "ambient dimension of each view, comma-separated")
        ->delimiter(',')
        ->capture_default_str();
    synth->add_option("--subspace-dim", synth_spec.subspace_dim)->capture_default_str();
    synth->add_option("--noise", synth_spec.noise_sigma)->capture_default_str();
    synth->add_option("--seed", synth_spec.seed)->capture_default_str();
    synth->add_option("--out", synth_out, "output directory")->capture_default_str();

    auto* eval = app.add_subcommand("eval", "score a label file against ground truth");
    std::string pred_path, truth_path;
    eval->add_option("--pred", pred_path, "predicted labels")->required();
    eval->add_option("--truth", truth_path, "ground-truth labels")->required();

    auto* sweep = app.add_subcommand("sweep", "sensitivity sweep over one trade-off weight");
    SolverFlags sweep_flags;
    umccev::SweepOptions sweep_opt;
    std::string values_csv;
    sweep->add_option("--manifest", sweep_opt.manifest, "dataset manifest")->required();
    sweep->add_option("--param", sweep_opt.parameter, "lambda1, lambda2 or lambda3")
        ->check(CLI::IsMember({"lambda1", "lambda2", "lambda3"}))
        ->capture_default_str();
    sweep->add_option("--values", values_csv, "comma-separated grid (default 2e-5,2e-4,...,2e3)");
    sweep->add_option("--repeats", sweep_opt.repeats, "clustering repeats per grid point")->capture_default_str();
    sweep->add_option("--out", sweep_opt.out_dir, "output directory")->capture_default_str();
    sweep_flags.attach(*sweep);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*cluster) {
            cluster_opt.config = cluster_flags.resolve();
            const auto rep = umccev::cmd_cluster(cluster_opt);
            std::cout << "iterations = " << rep.iterations << "\n"
                      << "final_max_residual = " << rep.final_max_residual << "\n";
            print_summary(rep.metrics);
            std::cout << "report = " << rep.report_path.string() << "\n";
        } else if (*synth) {
            std::cout << umccev::cmd_synth(synth_spec, synth_out).string() << "\n";
        } else if (*eval) {
            std::cout << umccev::format_metrics(umccev::cmd_eval(pred_path, truth_path));
        } else if (*sweep) {
            sweep_opt.config = sweep_flags.resolve();
            if (!values_csv.empty()) sweep_opt.values = parse_values(values_csv);
            const auto res = umccev::cmd_sweep(sweep_opt);
            std::cout << "table = " << res.table_path.string() << "\n";
        }
    } catch (const umccev::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
