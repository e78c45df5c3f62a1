#pragma once

#include "mrfcox/datamodel.hpp"
#include "mrfcox/graph.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace mrfcox {

/// Gamma-process prior on the cumulative baseline hazard with Weibull mean
/// H*(t) = eta * t^kappa and confidence weight a0.
struct GammaProcessSpec {
    double a0 = 2.0;
    double eta = 1.0;
    double kappa = 1.0;

    double mean_cumulative_hazard(double t) const;
    void validate() const;
};

/// Spike N(0, tau^2) and slab N(0, c^2 tau^2).
struct SpikeSlabSpec {
    double tau = 0.0375;
    double c = 20.0;

    double variance(bool included) const { return included ? c * c * tau * tau : tau * tau; }
    void validate() const;
};

/// Selection prior proportional to exp(a * sum(gamma) + b * gamma' G gamma).
struct MrfSpec {
    double a = -3.0;
    double b = 0.5;

    void validate() const;
};

struct PriorSpec {
    GammaProcessSpec baseline;
    SpikeSlabSpec spike_slab;
    MrfSpec mrf;
};

/// eta = events / total follow-up time, kappa = 1, a0 left at its default.
GammaProcessSpec default_baseline_for(const SurvivalDataset& data, double a0 = 2.0);

struct GammaParams {
    double shape;
    double rate;
};

std::vector<GammaParams> hazard_increment_prior_params(const GammaProcessSpec& spec,
                                                       const TimePartition& partition);

double mrf_log_prior_unnormalized(std::span<const std::uint8_t> gamma, const PriorGraph& g,
                                  const MrfSpec& spec);

double normal_log_density(double x, double mean, double variance);

/// P(gamma_j = 1 | gamma_{-j}, beta_j, G), computed as a logistic function
/// of the log-odds so that large graph terms cannot overflow.
double gamma_conditional_include_prob(Index j, std::span<const std::uint8_t> gamma, double beta_j,
                                      const PriorGraph& g, const MrfSpec& mrf,
                                      const SpikeSlabSpec& ss);

/// Log-odds form of the above given the precomputed neighbour field
/// sum_{i != j} G_ji gamma_i.
double gamma_include_log_odds(double neighbour_field, double beta_j, const MrfSpec& mrf,
                              const SpikeSlabSpec& ss);

double logistic(double x);

double beta_log_prior(const Eigen::VectorXd& beta, std::span<const std::uint8_t> gamma,
                      const SpikeSlabSpec& ss);

} // namespace mrfcox
