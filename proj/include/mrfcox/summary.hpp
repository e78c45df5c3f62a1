#pragma once

#include "mrfcox/sampler.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mrfcox {

/// Median probability model: covariates with posterior inclusion
/// probability strictly above 0.5, with coefficients sum(beta) / sum(gamma)
/// over the retained draws.
struct MpmFit {
    std::vector<double> inclusion_probs;
    std::vector<std::uint8_t> selected;
    std::vector<double> coefficients;
    Index model_size = 0;
    /// Posterior mean of the hazard increments.
    std::vector<double> h_mean;
};

MpmFit mpm(const PosteriorSamples& samples);
/// Pools the retained draws of all chains.
MpmFit mpm(std::span<const PosteriorSamples> chains);

struct SelectionMetrics {
    std::optional<double> sensitivity;
    std::optional<double> specificity;
    double accuracy = 0.0;
};

SelectionMetrics selection_metrics(std::span<const std::uint8_t> selected,
                                   std::span<const std::uint8_t> truth);

/// N / (1 + 2 sum rho_t), autocorrelations truncated by Geyer's initial
/// positive sequence, clipped to (0, N].
double effective_sample_size(std::span<const double> trace);

struct StabilityRow {
    std::string name;
    double frequency = 0.0;
    std::optional<double> coef_mean;
    std::optional<double> coef_sd;
    bool stable = false;
};

std::vector<StabilityRow> stability_report(std::span<const MpmFit> fits,
                                           std::span<const std::string> names,
                                           double threshold = 0.20);

} // namespace mrfcox
