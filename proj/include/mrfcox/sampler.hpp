#pragma once

#include "mrfcox/datamodel.hpp"
#include "mrfcox/graph.hpp"
#include "mrfcox/likelihood.hpp"
#include "mrfcox/priors.hpp"
#include "mrfcox/rng.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace mrfcox {

struct McmcConfig {
    int iterations = 6000;
    int warmup = 3000;
    int thin = 3;
    int chains = 1;
    std::uint64_t seed = 20240601;
    int partition_K = 20;
    PriorSpec priors;
    /// When set, the Weibull mean of the gamma process is fitted to the
    /// data's event rate (eta = events / follow-up, kappa = 1).
    bool baseline_from_data = true;
    double curvature_floor = 1e-6;
    double fallback_sd = 0.1;

    void validate() const;
    int retained() const { return (iterations - warmup) / thin; }

    static McmcConfig desk_profile();
    static McmcConfig paper_profile();
};

/**
 * Everything a chain reads but never writes: data, graph, partition and
 * the resolved priors. The dataset and graph must outlive the model.
 */
class SamplerModel {
public:
    SamplerModel(const SurvivalDataset& data, const PriorGraph& graph, const McmcConfig& config);

    const SurvivalDataset& data() const { return *data_; }
    const PriorGraph& graph() const { return *graph_; }
    const TimePartition& partition() const { return partition_; }
    const IntervalSets& sets() const { return sets_; }
    const PriorSpec& priors() const { return priors_; }
    const std::vector<GammaParams>& increment_prior() const { return increment_prior_; }
    const McmcConfig& config() const { return config_; }

private:
    const SurvivalDataset* data_;
    const PriorGraph* graph_;
    McmcConfig config_;
    TimePartition partition_;
    IntervalSets sets_;
    PriorSpec priors_;
    std::vector<GammaParams> increment_prior_;
};

struct ChainState {
    Eigen::VectorXd beta;
    std::vector<std::uint8_t> gamma;
    Eigen::VectorXd h;
    double log_lik = 0.0;
    std::uint64_t rng_seed = 0;
    Engine rng;
    long iteration = 0;
    std::vector<long> accept_counts;
    std::vector<long> proposal_counts;
    std::vector<long> fallback_counts;

    Index model_size() const;
};

/// gamma = 0, beta_j ~ N(0, tau^2), h_k from its gamma prior; the stream is
/// derive_seed(config seed, chain_id).
ChainState init_chain(const SamplerModel& model, int chain_id);

/**
 * One chain's mutable kernel: the state plus its likelihood workspace.
 * Each update is one block of the three-block Gibbs/MH sweep.
 */
class Chain {
public:
    Chain(const SamplerModel& model, ChainState state);

    /// Systematic-scan Gibbs over gamma_1..gamma_p.
    void update_gamma();
    /// Newton-proposal Metropolis-Hastings over beta_1..beta_p.
    void update_beta();
    /// Conjugate-approximate gamma draws of every hazard increment.
    void update_h();
    /// gamma, beta, h in that order, then a full cache refresh.
    void sweep();

    /// Log MH ratio for moving beta_j from its current value to `proposal`.
    double beta_log_acceptance_ratio(Index j, double proposal) const;

    const ChainState& state() const { return state_; }
    ChainState& state() { return state_; }
    const LikelihoodWorkspace& workspace() const { return ws_; }

    /// Cached log-likelihood minus a from-scratch recomputation.
    double cache_drift() const;

private:
    struct Proposal {
        double mean;
        double variance;
        bool fallback;
    };
    Proposal proposal_at(Index j, double value, const CoordinateDerivatives& lik, double prior_variance) const;
    static double proposal_log_density(const Proposal& q, double x);

    const SamplerModel* model_;
    ChainState state_;
    LikelihoodWorkspace ws_;
    Eigen::VectorXd neighbour_field_;
};

struct PosteriorSamples {
    Eigen::MatrixXd beta_draws;
    Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> gamma_draws;
    Eigen::MatrixXd h_draws;
    Eigen::VectorXd loglik_trace;
    Eigen::VectorXd model_size_trace;
    std::vector<double> acceptance_rates;
    long fallback_proposals = 0;
    std::uint64_t rng_seed = 0;
    int chain_id = 0;

    Index retained() const { return beta_draws.rows(); }
};

PosteriorSamples run_chain(const SamplerModel& model, int chain_id);

/// Chains run on a bounded thread pool; output order is chain order and the
/// result equals running each chain serially.
std::vector<PosteriorSamples> run_chains_parallel(const SamplerModel& model,
                                                  unsigned max_threads = 0);

} // namespace mrfcox
