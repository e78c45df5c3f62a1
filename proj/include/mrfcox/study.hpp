#pragma once

#include "mrfcox/sampler.hpp"
#include "mrfcox/simulate.hpp"
#include "mrfcox/summary.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mrfcox {

struct StudyInputs {
    std::vector<SurvivalDataset> train;
    SurvivalDataset test;
    std::vector<std::uint8_t> truth;
    std::vector<NamedGraph> graphs;
};

/// Simulates every training replicate, the test set and all scenario graphs.
StudyInputs simulate_study_inputs(const SimulationSpec& spec);
/// Reads the layout written by the `simulate` command.
StudyInputs load_study_inputs(const std::filesystem::path& sim_dir);

struct StudyOptions {
    /// Empty means every graph in the inputs.
    std::vector<std::string> scenarios;
    /// 0 means every training replicate.
    int replicates = 0;
    unsigned workers = 0;
    std::optional<double> t_star;
};

struct StudyCell {
    std::string scenario;
    int replicate = 0;
    bool ok = false;
    std::string error;
    std::uint64_t seed = 0;
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    double accuracy = 0.0;
    Index model_size = 0;
    double ibs = 0.0;
    double ess_model_size = 0.0;
    double acceptance_rate = 0.0;
};

struct StudyResult {
    std::vector<StudyCell> cells;
    /// Kaplan-Meier reference IBS per replicate.
    std::vector<double> km_ibs;
    double t_star = 0.0;
};

/// Fits every (scenario, replicate) cell on a worker pool, writing
/// cells/<scenario>/rep_XX/{metrics,mpm}.json and km/rep_XX.json atomically,
/// then rebuilds the result from those files. A failed cell is recorded
/// and the study continues.
StudyResult run_study(const StudyInputs& inputs, const McmcConfig& mcmc, const StudyOptions& options,
                      const std::filesystem::path& out_dir);

/// Re-reads all cell files under `out_dir`.
StudyResult collect_study(const std::filesystem::path& out_dir);

/// table1.csv (study I scenarios), table2.csv (all scenarios), ibs.csv and
/// model_size.csv in long format.
void write_study_tables(const StudyResult& result, const std::filesystem::path& out_dir);

struct ScenarioSummary {
    std::string scenario;
    int cells = 0;
    double sensitivity_mean = 0.0, sensitivity_se = 0.0;
    double specificity_mean = 0.0, specificity_se = 0.0;
    double accuracy_mean = 0.0, accuracy_se = 0.0;
    double model_size_mean = 0.0, model_size_median = 0.0;
    double ibs_mean = 0.0, ibs_se = 0.0;
};

std::vector<ScenarioSummary> summarize_study(const StudyResult& result);

} // namespace mrfcox
