#include "mrfcox/priors.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace mrfcox {

double GammaProcessSpec::mean_cumulative_hazard(double t) const {
    return eta * std::pow(t, kappa);
}

void GammaProcessSpec::validate() const {
    if (!(a0 > 0.0) || !(eta > 0.0) || !(kappa > 0.0)) {
        throw std::invalid_argument("gamma-process hyperparameters a0, eta, kappa must be positive");
    }
}

void SpikeSlabSpec::validate() const {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("spike standard deviation tau must be positive");
    }
    if (!(c > 1.0)) {
        throw std::invalid_argument("slab inflation c must exceed 1");
    }
}

void MrfSpec::validate() const {
    if (!(b >= 0.0) || !std::isfinite(a)) {
        throw std::invalid_argument("MRF hyperparameters need finite a and b >= 0");
    }
}

GammaProcessSpec default_baseline_for(const SurvivalDataset& data, double a0) {
    const double events = static_cast<double>(data.event_count());
    const double exposure = data.times.sum();
    GammaProcessSpec spec;
    spec.a0 = a0;
    // an all-censored sample still needs a positive prior mean
    spec.eta = std::max(events, 0.5) / exposure;
    spec.kappa = 1.0;
    return spec;
}

std::vector<GammaParams> hazard_increment_prior_params(const GammaProcessSpec& spec,
                                                       const TimePartition& partition) {
    spec.validate();
    std::vector<GammaParams> params;
    params.reserve(partition.K());
    for (int k = 1; k <= partition.K(); ++k) {
        const double shape = spec.a0 * (spec.mean_cumulative_hazard(partition.cuts[k]) -
                                        spec.mean_cumulative_hazard(partition.cuts[k - 1]));
        params.push_back({shape, spec.a0});
    }
    return params;
}

double mrf_log_prior_unnormalized(std::span<const std::uint8_t> gamma, const PriorGraph& g,
                                  const MrfSpec& spec) {
    if (static_cast<Index>(gamma.size()) != g.p()) {
        throw std::invalid_argument("selection vector length does not match graph dimension");
    }
    double linear = 0.0;
    double quadratic = 0.0;
    for (Index i = 0; i < g.p(); ++i) {
        if (!gamma[i]) {
            continue;
        }
        linear += 1.0;
        for (Index j = 0; j < g.p(); ++j) {
            if (gamma[j]) {
                quadratic += g.weight(i, j);
            }
        }
    }
    return spec.a * linear + spec.b * quadratic;
}

double normal_log_density(double x, double mean, double variance) {
    const double z = x - mean;
    return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + z * z / variance);
}

double logistic(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double gamma_include_log_odds(double neighbour_field, double beta_j, const MrfSpec& mrf,
                              const SpikeSlabSpec& ss) {
    // gamma' G gamma changes by 2 * sum_{i != j} G_ji gamma_i when gamma_j flips on
    return mrf.a + 2.0 * mrf.b * neighbour_field +
           normal_log_density(beta_j, 0.0, ss.variance(true)) -
           normal_log_density(beta_j, 0.0, ss.variance(false));
}

double gamma_conditional_include_prob(Index j, std::span<const std::uint8_t> gamma, double beta_j,
                                      const PriorGraph& g, const MrfSpec& mrf,
                                      const SpikeSlabSpec& ss) {
    if (static_cast<Index>(gamma.size()) != g.p() || j < 0 || j >= g.p()) {
        throw std::invalid_argument("selection vector, index and graph dimension are inconsistent");
    }
    double field = 0.0;
    for (Index i = 0; i < g.p(); ++i) {
        if (i != j && gamma[i]) {
            field += g.weight(j, i);
        }
    }
    return logistic(gamma_include_log_odds(field, beta_j, mrf, ss));
}

double beta_log_prior(const Eigen::VectorXd& beta, std::span<const std::uint8_t> gamma,
                      const SpikeSlabSpec& ss) {
    if (static_cast<std::size_t>(beta.size()) != gamma.size()) {
        throw std::invalid_argument("coefficient and selection vectors differ in length");
    }
    double total = 0.0;
    for (Index j = 0; j < beta.size(); ++j) {
        total += normal_log_density(beta[j], 0.0, ss.variance(gamma[j] != 0));
    }
    return total;
}

} // namespace mrfcox
