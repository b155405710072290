#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "potts/config.hpp"
#include "potts/runner.hpp"

using namespace potts;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name) {
    fs::path p = fs::temp_directory_path() / ("potts_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST(Config, KernelParsing) {
    json j = {{"type", "block"},
              {"boundaries", {0.0, 0.5, 1.0}},
              {"values", {{2.0, 1.0}, {1.0, 2.0}}}};
    Kernel k = parse_kernel(j);
    EXPECT_EQ(k(0.1, 0.1), 2.0);
    EXPECT_NO_THROW(parse_kernel(json{{"type", "dubins"}}));
    json r1 = {{"type", "rank1"},
               {"psi", "piecewise"},
               {"knots", {0.0, 1.0}},
               {"vals", {1.0, 1.0}}};
    EXPECT_NO_THROW(parse_kernel(r1));
    json bad = j;
    bad["extra"] = 1;
    EXPECT_THROW(parse_kernel(bad), config_invalid);
    EXPECT_THROW(parse_kernel(json{{"type", "mystery"}}), config_invalid);
}

TEST(Config, TopLevelValidation) {
    json ok = {{"task", "sample-graph"},
               {"kernel", {{"type", "dubins"}}},
               {"n", 10},
               {"c", 1.0},
               {"seed", 3}};
    EXPECT_NO_THROW(parse_config(ok));
    json unknown = ok;
    unknown["mystery_key"] = true;
    EXPECT_THROW(parse_config(unknown), config_invalid);
    EXPECT_THROW(parse_config(json{{"task", "fly-to-the-moon"}}), config_invalid);
    EXPECT_THROW(parse_config(json::array()), config_invalid);
}

TEST(Runner, SampleGraphIsIdempotent) {
    auto dir = fresh_dir("sample");
    json j = {{"task", "sample-graph"}, {"kernel", {{"type", "block"},
                                                    {"boundaries", {0.0, 1.0}},
                                                    {"values", {{1.0}}}}},
              {"n", 100},           {"c", 4.0},
              {"seed", 7},          {"out", dir.string()}};
    ExperimentConfig cfg = parse_config(j);
    auto report = run_experiment(cfg);
    EXPECT_EQ(report.exit_code, 0);
    EXPECT_TRUE(fs::exists(dir / "graph.edgelist"));
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
    EXPECT_TRUE(fs::exists(dir / "results.csv"));
    std::string graph1 = slurp((dir / "graph.edgelist").string());
    std::string csv1 = slurp((dir / "results.csv").string());
    EXPECT_EQ(report.summary["edges"].get<size_t>(),
              size_t(std::count(graph1.begin(), graph1.end(), '\n')) - 1);
    EXPECT_NEAR(report.summary["expected_edges"].get<double>(), 198.0, 1e-9);

    run_experiment(cfg);  // byte-identical rerun
    EXPECT_EQ(slurp((dir / "graph.edgelist").string()), graph1);
    EXPECT_EQ(slurp((dir / "results.csv").string()), csv1);
}

TEST(Runner, MaxcutTaskOnTriangleFixture) {
    auto dir = fresh_dir("maxcut");
    {
        std::ofstream f(dir / "triangle.edgelist");
        f << "3 3\n1 2\n1 3\n2 3\n";
    }
    json j = {{"task", "maxcut"},
              {"graph_file", (dir / "triangle.edgelist").string()},
              {"kappa", 2},
              {"solver", "exhaustive"},
              {"out", dir.string()}};
    auto report = run_experiment(parse_config(j));
    EXPECT_EQ(report.exit_code, 0);
    EXPECT_EQ(report.summary["value"].get<double>(), 2.0);
    json result;
    std::ifstream(dir / "maxcut.json") >> result;
    EXPECT_EQ(result["value"].get<double>(), 2.0);
    EXPECT_EQ(result["assignment"].size(), 3u);
    for (int c : result["assignment"]) {
        EXPECT_GE(c, 1);
        EXPECT_LE(c, 2);
    }
}

TEST(Runner, FreeEnergyTaskWritesEstimatorSchema) {
    auto dir = fresh_dir("fe");
    json j = {{"task", "free-energy"},
              {"model",
               {{"kappa", 2}, {"rho", {1.0}}, {"delta2", {{1.0}}}, {"beta", 0.5}}},
              {"n", 6},
              {"replicas", 25},
              {"d", {{0.5, 0.5}}},
              {"seed", 5},
              {"out", dir.string()}};
    auto report = run_experiment(parse_config(j));
    EXPECT_EQ(report.exit_code, 0);
    std::string csv = slurp((dir / "results.csv").string());
    EXPECT_TRUE(csv.starts_with("N,kappa,beta,constraint_hash,mean,stderr,replicas,seed"));
    EXPECT_GT(report.summary["mean"].get<double>(), 0.0);
    EXPECT_GT(report.summary["stderr"].get<double>(), 0.0);
}

TEST(Runner, ParisiMinAndGroundstateTasks) {
    auto dir = fresh_dir("pmin");
    json model = {{"kappa", 2}, {"rho", {1.0}}, {"delta2", {{1.0}}}, {"beta", 0.0}};
    json j = {{"task", "parisi-min"}, {"model", model},          {"d", {{0.5, 0.5}}},
              {"r", 1},               {"restarts", 3},           {"out", dir.string()}};
    auto report = run_experiment(parse_config(j));
    EXPECT_EQ(report.exit_code, 0);
    EXPECT_NEAR(report.summary["value"].get<double>(), std::log(2.0), 1e-6);

    auto dir2 = fresh_dir("gs");
    json model2 = {{"kappa", 2}, {"rho", {1.0}}, {"delta2", {{0.0}}}, {"beta", 1.0}};
    json j2 = {{"task", "groundstate"}, {"model", model2}, {"d", {{0.5, 0.5}}},
               {"beta_grid", {2.0, 4.0, 8.0}}, {"r", 1},   {"restarts", 2},
               {"out", dir2.string()}};
    auto report2 = run_experiment(parse_config(j2));
    EXPECT_EQ(report2.exit_code, 0);
    EXPECT_NEAR(report2.summary["ground_state"].get<double>(), 0.0, 1e-6);
    std::string csv = slurp((dir2 / "results.csv").string());
    EXPECT_TRUE(csv.starts_with("model_hash,d_hash,r,beta,value,err,wall_ms,seed"));
    EXPECT_NE(csv.find("inf"), std::string::npos);
}

TEST(Runner, ParisiEvalTask) {
    auto dir = fresh_dir("peval");
    json j = {{"task", "parisi-eval"},
              {"model", {{"kappa", 2}, {"rho", {1.0}}, {"delta2", {{1.0}}}, {"beta", 1.0}}},
              {"d", {{0.5, 0.5}}},
              {"params",
               {{"x", {1.0, 1.0}},
                {"q", {{{{0.0, 0.0}, {0.0, 0.0}}, {{0.5, 0.0}, {0.0, 0.5}}}}},
                {"lambda", {{0.0, 0.0}}}}},
              {"out", dir.string()}};
    auto report = run_experiment(parse_config(j));
    EXPECT_EQ(report.exit_code, 0);
    EXPECT_NEAR(report.summary["value"].get<double>(), std::log(2.0) + 0.25, 1e-3);
    double v = report.summary["value"].get<double>();
    double parts = report.summary["z_term"].get<double>() -
                   report.summary["lambda_term"].get<double>() -
                   report.summary["y_term"].get<double>();
    EXPECT_NEAR(v, parts, 1e-12);
}

TEST(Runner, VerifySuites) {
    auto dir = fresh_dir("verify");
    json j = {{"task", "verify"}, {"suite", "closed-forms"}, {"out", dir.string()}};
    auto report = run_experiment(parse_config(j));
    EXPECT_EQ(report.exit_code, 0);
    EXPECT_TRUE(report.summary["pass"].get<bool>());
    EXPECT_THROW(run_experiment(parse_config(json{
                     {"task", "verify"}, {"suite", "nonsense"}, {"out", dir.string()}})),
                 suite_unknown);
}

#ifdef POTTS_CLI
TEST(Cli, EndToEndSubprocess) {
    auto dir = fresh_dir("cli");
    json j = {{"task", "sample-graph"},
              {"kernel", {{"type", "dubins"}}},
              {"n", 40},
              {"c", 2.0},
              {"seed", 9},
              {"out", dir.string()}};
    std::ofstream(dir / "config.json") << j.dump();
    std::string cmd = std::string(POTTS_CLI) + " sample-graph --config " +
                      (dir / "config.json").string() + " --out " + dir.string();
    int rc = std::system(cmd.c_str());
    EXPECT_EQ(WEXITSTATUS(rc), 0);
    EXPECT_TRUE(fs::exists(dir / "graph.edgelist"));

    // wrong subcommand for the config: usage error (exit 2)
    std::string bad = std::string(POTTS_CLI) + " maxcut --config " +
                      (dir / "config.json").string() + " 2>/dev/null";
    EXPECT_EQ(WEXITSTATUS(std::system(bad.c_str())), 2);

    // missing config file: usage error
    std::string missing = std::string(POTTS_CLI) + " verify --config /nonexistent.json 2>/dev/null";
    EXPECT_EQ(WEXITSTATUS(std::system(missing.c_str())), 2);
}
#endif
