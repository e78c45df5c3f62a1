#pragma once

#include "mrfcox/datamodel.hpp"
#include "mrfcox/graph.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace mrfcox {

struct SimulationSpec {
    Index n = 100;
    Index p = 200;
    Index n_relevant = 20;
    Index block_size = 15;
    double block_rho = 0.5;
    double beta_low = -1.0;
    double beta_high = 1.0;
    /// True Weibull cumulative baseline hazard eta * t^kappa.
    double weibull_eta = 1.0;
    double weibull_kappa = 1.5;
    double censor_rate_target = 0.2;
    int n_datasets = 20;
    std::uint64_t seed = 20240601;

    void validate() const;
};

/// Identity with block_rho between distinct covariates of the leading block.
Eigen::MatrixXd make_covariance(const SimulationSpec& spec);

struct SimulatedData {
    SurvivalDataset data;
    std::vector<std::uint8_t> truth;
    Eigen::VectorXd beta_true;
};

/// Coefficients shared by every replicate of a spec.
Eigen::VectorXd draw_true_beta(const SimulationSpec& spec);

/// Training replicates use ids 0..n_datasets-1; test_replicate_id() gives
/// the independent test set.
SimulatedData draw_dataset(const SimulationSpec& spec, int replicate_id);
int test_replicate_id();

/// Rate of an exponential censoring time C such that the mean over the
/// given event times of P(C < T) equals `target`.
double calibrate_censoring_rate(const Eigen::VectorXd& event_times, double target);

struct NamedGraph {
    std::string name;
    PriorGraph graph;
};

/// All prior-graph scenarios of both simulation studies, in a fixed order.
std::vector<NamedGraph> scenario_graphs(const SimulationSpec& spec);

/// Scenario names that make up simulation study I.
const std::vector<std::string>& study_one_scenarios();

} // namespace mrfcox
