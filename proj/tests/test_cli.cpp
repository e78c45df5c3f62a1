#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"

#include "mrfcox/commands.hpp"
#include "mrfcox/sample_io.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

using namespace mrfcox;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

RunConfig tiny_config() {
    RunConfig config = RunConfig::for_profile("desk");
    config.simulation.n = 40;
    config.simulation.p = 10;
    config.simulation.n_relevant = 4;
    config.simulation.block_size = 3;
    config.simulation.n_datasets = 2;
    config.mcmc.iterations = 200;
    config.mcmc.warmup = 100;
    config.mcmc.thin = 2;
    config.mcmc.chains = 2;
    config.mcmc.partition_K = 5;
    config.study.workers = 1;
    return config;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file() && e.path().filename() != "timing.json") {
            files[fs::relative(e.path(), dir).string()] = slurp(e.path());
        }
    }
    return files;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(MRFCOX_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST_CASE("config JSON round trip") {
    RunConfig c = RunConfig::for_profile("paper");
    c.mcmc.priors.mrf.b = 0.25;
    c.evaluation.t_star = 3.5;
    c.study.scenarios = {"true", "empty"};
    c.perturb.block = {1, 2, 3};
    c.paths.data = "train.csv";
    const json j = config_to_json(c);
    CHECK(config_to_json(config_from_json(j)) == j);
    CHECK(config_from_json(json{{"config", j}}).mcmc.iterations == 30000);
    CHECK(config_from_json(json{{"mcmc", {{"thin", 7}}}}).mcmc.thin == 7);
    CHECK(config_from_json(json{{"mcmc", {{"thin", 7}}}}).mcmc.iterations == 6000);
    CHECK_THROWS_AS(config_from_json(json{{"mcmc", {{"thin", "x"}}}}), ParseError);
    CHECK_THROWS(RunConfig::for_profile("huge"));
}

TEST_CASE("simulate is byte-identical on rerun") {
    const fs::path dir = oracle::scratch_dir("cli_sim");
    RunConfig config = tiny_config();
    config.paths.out = (dir / "sim").string();
    cmd_simulate(config);
    const auto first = snapshot(dir / "sim");
    CHECK(first.count("train_01.csv") == 1);
    CHECK(first.count("train_02.csv") == 1);
    CHECK(first.count("test.csv") == 1);
    CHECK(first.count("truth.json") == 1);
    CHECK(first.count("graphs/true.txt") == 1);

    const json manifest = read_json(dir / "sim" / "manifest.json");
    CHECK(manifest.at("command") == "simulate");
    CHECK(manifest.at("version") == version_string());
    CHECK(manifest.at("config").at("simulation").at("seed") == config.simulation.seed);
    CHECK(manifest.at("edge_counts").at("true") == 3);

    cmd_simulate(config_from_json(manifest));
    CHECK(snapshot(dir / "sim") == first);
}

TEST_CASE("fit, replay, summarize and evaluate") {
    const fs::path dir = oracle::scratch_dir("cli_fit");
    RunConfig config = tiny_config();
    config.paths.out = (dir / "sim").string();
    cmd_simulate(config);

    RunConfig fit_config = tiny_config();
    fit_config.paths.data = (dir / "sim" / "train_01.csv").string();
    fit_config.paths.graph = (dir / "sim" / "graphs" / "true.txt").string();
    fit_config.paths.out = (dir / "fit").string();
    const json result = cmd_fit(fit_config);
    CHECK(result.at("warnings").is_array());
    const auto first = snapshot(dir / "fit");
    for (const char* f : {"mpm.json", "diagnostics.json", "manifest.json", "chain_1/beta.csv", "chain_2/beta.csv"}) {
        CHECK(first.count(f) == 1);
    }
    const json manifest = read_json(dir / "fit" / "manifest.json");
    CHECK(manifest.at("command") == "fit");
    CHECK(manifest.at("chain_seeds").size() == 2);
    CHECK(manifest.at("config").at("mcmc").at("seed") == fit_config.mcmc.seed);
    CHECK(fs::exists(dir / "fit" / "timing.json"));

    cmd_fit(config_from_json(manifest));
    CHECK(snapshot(dir / "fit") == first);

    RunConfig sum_config = tiny_config();
    sum_config.paths.run_dir = (dir / "fit").string();
    sum_config.paths.out = (dir / "summary").string();
    fs::create_directories(dir / "summary");
    cmd_summarize(sum_config);
    CHECK(slurp(dir / "summary" / "mpm.json") == slurp(dir / "fit" / "mpm.json"));
    CHECK(fs::exists(dir / "summary" / "summarize_manifest.json"));

    RunConfig eval_config = tiny_config();
    eval_config.paths.fit = (dir / "fit" / "mpm.json").string();
    eval_config.paths.test = (dir / "sim" / "test.csv").string();
    eval_config.paths.truth = (dir / "sim" / "truth.json").string();
    eval_config.paths.data = (dir / "sim" / "train_01.csv").string();
    eval_config.paths.out = (dir / "eval").string();
    cmd_evaluate(eval_config);
    const json metrics = read_json(dir / "eval" / "metrics.json");
    CHECK(metrics.at("ibs").get<double>() >= 0.0);
    CHECK(metrics.at("ibs").get<double>() <= 1.0);
    CHECK(metrics.contains("km_ibs"));
    CHECK(metrics.contains("model_size"));
    CHECK(metrics.contains("accuracy"));
    CHECK(slurp(dir / "eval" / "bs_curve.csv").rfind("t,", 0) == 0);
    CHECK(read_json(dir / "eval" / "manifest.json").at("command") == "evaluate");
}

TEST_CASE("perturb-graph writes the graph and its manifest") {
    const fs::path dir = oracle::scratch_dir("cli_perturb");
    PriorGraph g = empty_graph(6);
    for (Index i = 0; i < 4; ++i) {
        for (Index j = i + 1; j < 4; ++j) {
            g.set_edge(i, j, 1.0);
        }
    }
    write_graph(g, dir / "g.txt");
    RunConfig config = tiny_config();
    config.paths.graph = (dir / "g.txt").string();
    config.paths.out = (dir / "k2.txt").string();
    config.perturb.mode = "uniform";
    config.perturb.k = 2;
    const json r = cmd_perturb_graph(config);
    CHECK(r.at("edges_before") == 6);
    CHECK(r.at("edges_after") == 3);
    CHECK(edge_count(read_graph(dir / "k2.txt")) == 3);
    CHECK(read_json(dir / "k2.txt.manifest.json").at("edges_after") == 3);

    config.perturb.mode = "block-plus";
    config.perturb.block = {1, 2};
    config.paths.out = (dir / "bp.txt").string();
    CHECK(cmd_perturb_graph(config).at("edges_after") == 1);
    config.perturb.mode = "shuffle";
    CHECK_THROWS(cmd_perturb_graph(config));
}

TEST_CASE("study on a tiny configuration") {
    const fs::path dir = oracle::scratch_dir("cli_study");
    RunConfig config = tiny_config();
    config.paths.out = (dir / "sim").string();
    cmd_simulate(config);
    config.paths.sim_dir = (dir / "sim").string();
    config.paths.out = (dir / "study").string();
    config.study.scenarios = {"empty", "true"};
    const json r = cmd_study(config);
    CHECK(r.at("cells") == 4);
    CHECK(r.at("failed_cells") == 0);
    for (const char* f : {"table1.csv", "table2.csv", "ibs.csv", "model_size.csv", "stability.csv", "manifest.json"}) {
        CHECK(fs::exists(dir / "study" / f));
    }
    CHECK(fs::exists(dir / "study" / "cells" / "true" / "rep_02" / "mpm.json"));
}

TEST_CASE("command-line binary") {
    const fs::path dir = oracle::scratch_dir("cli_binary");
    const fs::path log = dir / "log.txt";
    REQUIRE(run_cli("simulate --out " + (dir / "sim").string() + " --datasets 1 --seed 5", log) == 0);

    // a 199-node graph against a 200-feature dataset fails before any sampling
    PriorGraph small = empty_graph(199);
    small.set_edge(0, 1, 1.0);
    write_graph(small, dir / "g199.txt");
    const int code = run_cli("fit --data " + (dir / "sim" / "train_01.csv").string() + " --graph " +
                                 (dir / "g199.txt").string() + " --out " + (dir / "fit").string(),
                             log);
    CHECK(code == 3);
    const std::string message = slurp(log);
    CHECK(message.find("p=199") != std::string::npos);
    CHECK(message.find("p=200") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "fit"));

    CHECK(run_cli("fit --data " + (dir / "missing.csv").string() + " --out " + (dir / "fit").string(), log) != 0);
    CHECK(run_cli("bogus", log) != 0);
    CHECK(run_cli("--version", log) == 0);
    CHECK(slurp(log).find(version_string()) != std::string::npos);
}
