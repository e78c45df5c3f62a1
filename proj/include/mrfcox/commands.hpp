#pragma once

#include "mrfcox/sampler.hpp"
#include "mrfcox/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mrfcox {

struct EvaluationSettings {
    std::optional<double> t_star;
    double stability_threshold = 0.20;
};

struct StudySettings {
    int replicates = 0;
    std::vector<std::string> scenarios;
    unsigned workers = 0;
};

struct PerturbSettings {
    std::string mode = "uniform";
    int k = 2;
    /// 1-based indices, as given on the command line.
    std::vector<long> block;
    double fraction = 1.0;
    std::uint64_t seed = 1;
};

struct PathSettings {
    std::string data;
    std::string graph;
    std::string out;
    std::string test;
    std::string fit;
    std::string truth;
    std::string run_dir;
    std::string sim_dir;
};

/**
 * Effective configuration of one command. Built from a profile, then a
 * JSON config file, then command-line flags; the result is echoed into the
 * run manifest and can be fed back through `--config` to rerun the stage.
 */
struct RunConfig {
    std::string profile = "desk";
    McmcConfig mcmc;
    SimulationSpec simulation;
    EvaluationSettings evaluation;
    StudySettings study;
    PerturbSettings perturb;
    PathSettings paths;

    static RunConfig for_profile(const std::string& profile);
};

nlohmann::json config_to_json(const RunConfig& config);
/// Overlays the keys present in `j` onto `base`. A full manifest is
/// accepted too: its "config" member is used.
RunConfig config_from_json(const nlohmann::json& j, RunConfig base);
/// Profile named by `j` (or "desk") overlaid by `j`.
RunConfig config_from_json(const nlohmann::json& j);

std::string version_string();

nlohmann::json cmd_simulate(const RunConfig& config);
nlohmann::json cmd_fit(const RunConfig& config);
nlohmann::json cmd_summarize(const RunConfig& config);
nlohmann::json cmd_evaluate(const RunConfig& config);
nlohmann::json cmd_perturb_graph(const RunConfig& config);
nlohmann::json cmd_study(const RunConfig& config);

} // namespace mrfcox
