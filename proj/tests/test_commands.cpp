#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "umccev/commands.hpp"

using namespace umccev;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> parse_report(const fs::path& p) {
    std::map<std::string, std::string> kv;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        const auto eq = line.find(" = ");
        if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
        kv[line.substr(0, eq)] = line.substr(eq + 3);
    }
    return kv;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

class Commands : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("umccev_cmd_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        SynthSpec spec;
        spec.samples_per_cluster = 10;
        spec.ambient_dims = {6, 8};
        spec.subspace_dim = 2;
        spec.seed = 3;
        manifest_ = cmd_synth(spec, dir_ / "data");
        cfg_.max_iter = 20;
    }
    void TearDown() override { fs::remove_all(dir_); }

    fs::path dir_;
    fs::path manifest_;
    SolverConfig cfg_;
};

}  // namespace

TEST(Ladder, DecadeRange) {
    const auto l = lambda_ladder();
    ASSERT_EQ(l.size(), 9u);
    EXPECT_EQ(l.front(), 2e-5);
    EXPECT_EQ(l.back(), 2e3);
    for (std::size_t i = 1; i < l.size(); ++i) EXPECT_NEAR(l[i] / l[i - 1], 10.0, 1e-12);
}

TEST(Summarize, PopulationStd) {
    const auto s = summarize("acc", {1.0, 0.5, 0.0});
    EXPECT_DOUBLE_EQ(s.mean, 0.5);
    EXPECT_DOUBLE_EQ(s.std, std::sqrt(1.0 / 6.0));
    EXPECT_EQ(summarize("acc", {0.7}).std, 0.0);
    EXPECT_NE(derive_seed(0, 0), derive_seed(0, 1));
    EXPECT_EQ(derive_seed(5, 2), derive_seed(5, 2));
}

TEST_F(Commands, SynthManifestLoads) {
    const auto d = load_manifest(manifest_);
    EXPECT_EQ(d.samples(), 30);
    EXPECT_EQ(d.view_count(), 2u);
    EXPECT_TRUE(d.labels.has_value());
}

TEST_F(Commands, ClusterWritesArtifactsAndConsistentReport) {
    ClusterOptions opt{manifest_, cfg_, 5, dir_ / "out"};
    const RunReport rep = cmd_cluster(opt);
    EXPECT_EQ(rep.label_paths.size(), 5u);
    for (const auto& p : rep.label_paths) EXPECT_EQ(load_labels(p).size(), 30u);
    EXPECT_EQ(load_matrix(rep.affinity_path).rows(), 30);

    const std::string trace = slurp(rep.trace_path);
    EXPECT_EQ(trace.substr(0, trace.find('\n')), "iter,r_zs,r_u1,r_u2,r_recon,objective");
    EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), rep.iterations + 1);

    const auto kv = parse_report(rep.report_path);
    EXPECT_EQ(kv.at("repeats"), "5");
    EXPECT_EQ(kv.at("iterations"), std::to_string(rep.iterations));
    for (const auto& name : metric_names()) {
        const auto runs = split_doubles(kv.at("metric." + name + ".runs"));
        ASSERT_EQ(runs.size(), 5u);
        const auto s = summarize(name, runs);
        EXPECT_NEAR(std::stod(kv.at("metric." + name + ".mean")), s.mean, 1e-12);
        EXPECT_NEAR(std::stod(kv.at("metric." + name + ".std")), s.std, 1e-12);
    }
    for (const auto& entry : fs::directory_iterator(opt.out_dir))
        EXPECT_NE(entry.path().extension(), ".tmp");
}

TEST_F(Commands, SingleRepeatHasZeroStd) {
    const RunReport rep = cmd_cluster({manifest_, cfg_, 1, dir_ / "one"});
    for (const auto& m : rep.metrics) EXPECT_EQ(m.std, 0.0);
}

TEST_F(Commands, ClusterWithoutLabelsOmitsMetrics) {
    std::ofstream(dir_ / "data" / "nolabels.txt") << "view = view0.csv\nview = view1.csv\nclusters = 3\n";
    const RunReport rep = cmd_cluster({dir_ / "data" / "nolabels.txt", cfg_, 2, dir_ / "nl"});
    EXPECT_TRUE(rep.metrics.empty());
    EXPECT_EQ(slurp(rep.report_path).find("metric."), std::string::npos);
    EXPECT_EQ(load_labels(rep.label_paths[1]).size(), 30u);
}

TEST_F(Commands, ClusterIsDeterministic) {
    const RunReport a = cmd_cluster({manifest_, cfg_, 3, dir_ / "a"});
    const RunReport b = cmd_cluster({manifest_, cfg_, 3, dir_ / "b"});
    for (std::size_t r = 0; r < 3; ++r) EXPECT_EQ(slurp(a.label_paths[r]), slurp(b.label_paths[r]));
    EXPECT_EQ(slurp(a.affinity_path), slurp(b.affinity_path));
    EXPECT_EQ(slurp(a.trace_path), slurp(b.trace_path));
}

TEST_F(Commands, SweepRowsAndSinglePointAgreement) {
    SweepOptions opt{manifest_, cfg_, "lambda2", {0.02, 0.2, 2.0}, 2, dir_ / "sweep"};
    const SweepResult res = cmd_sweep(opt);
    ASSERT_EQ(res.rows.size(), 3u);
    const std::string table = slurp(res.table_path);
    EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 4);
    EXPECT_EQ(table.substr(0, table.find('\n')), "param,value,acc,nmi,purity,precision,recall,fscore,ari,iterations");

    opt.values = {cfg_.lambda2};
    const SweepResult one = cmd_sweep(opt);
    const RunReport rep = cmd_cluster({manifest_, cfg_, 2, dir_ / "ref"});
    ASSERT_EQ(one.rows.size(), 1u);
    EXPECT_EQ(one.rows[0].iterations, rep.iterations);
    for (std::size_t k = 0; k < rep.metrics.size(); ++k)
        EXPECT_EQ(one.rows[0].metrics[k].mean, rep.metrics[k].mean);

    opt.parameter = "eta";
    EXPECT_THROW(cmd_sweep(opt), InvalidInput);
    opt.parameter = "lambda1";
    opt.values.clear();
    EXPECT_THROW(cmd_sweep(opt), InvalidInput);
}

TEST_F(Commands, Eval) {
    save_labels({0, 0, 1, 1}, dir_ / "p.txt");
    save_labels({0, 1, 0, 1}, dir_ / "t.txt");
    save_labels({1, 1, 0, 0}, dir_ / "q.txt");
    save_labels({0, 1, 0}, dir_ / "short.txt");
    const MetricSet same = cmd_eval(dir_ / "p.txt", dir_ / "p.txt");
    for (double x : as_vector(same)) EXPECT_EQ(x, 1.0);
    EXPECT_EQ(cmd_eval(dir_ / "q.txt", dir_ / "p.txt").acc, 1.0);
    const MetricSet cross = cmd_eval(dir_ / "p.txt", dir_ / "t.txt");
    EXPECT_DOUBLE_EQ(cross.acc, 0.5);
    EXPECT_NEAR(cross.nmi, 0.0, 1e-15);
    EXPECT_DOUBLE_EQ(cross.ari, -0.5);
    EXPECT_THROW(cmd_eval(dir_ / "p.txt", dir_ / "short.txt"), DimensionMismatchError);
    EXPECT_THROW(cmd_eval(dir_ / "p.txt", dir_ / "none.txt"), MissingFileError);
}
