#include "mrfcox/summary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrfcox {

MpmFit mpm(const PosteriorSamples& samples) {
    return mpm(std::span<const PosteriorSamples>(&samples, 1));
}

MpmFit mpm(std::span<const PosteriorSamples> chains) {
    if (chains.empty()) {
        throw std::invalid_argument("MPM needs at least one chain");
    }
    const Index p = chains.front().beta_draws.cols();
    const Index K = chains.front().h_draws.cols();
    Eigen::VectorXd beta_sum = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd gamma_sum = Eigen::VectorXd::Zero(p);
    Eigen::VectorXd h_sum = Eigen::VectorXd::Zero(K);
    Index draws = 0;
    for (const auto& chain : chains) {
        if (chain.beta_draws.cols() != p || chain.h_draws.cols() != K) {
            throw std::invalid_argument("chains disagree on dimensions");
        }
        beta_sum += chain.beta_draws.colwise().sum().transpose();
        gamma_sum += chain.gamma_draws.cast<double>().colwise().sum().transpose();
        h_sum += chain.h_draws.colwise().sum().transpose();
        draws += chain.retained();
    }
    if (draws < 1) {
        throw std::invalid_argument("MPM needs at least one retained draw");
    }
    MpmFit fit;
    fit.inclusion_probs.resize(p);
    fit.selected.resize(p);
    fit.coefficients.resize(p);
    for (Index j = 0; j < p; ++j) {
        fit.inclusion_probs[j] = gamma_sum[j] / static_cast<double>(draws);
        const bool keep = fit.inclusion_probs[j] > 0.5;
        fit.selected[j] = keep ? 1 : 0;
        fit.coefficients[j] = keep ? beta_sum[j] / gamma_sum[j] : 0.0;
        fit.model_size += keep ? 1 : 0;
    }
    fit.h_mean.resize(K);
    for (Index k = 0; k < K; ++k) {
        fit.h_mean[k] = h_sum[k] / static_cast<double>(draws);
    }
    return fit;
}

SelectionMetrics selection_metrics(std::span<const std::uint8_t> selected,
                                   std::span<const std::uint8_t> truth) {
    if (selected.size() != truth.size()) {
        throw std::invalid_argument("selected and truth vectors differ in length");
    }
    double tp = 0, tn = 0, fp = 0, fn = 0;
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (truth[j]) {
            (selected[j] ? tp : fn) += 1;
        } else {
            (selected[j] ? fp : tn) += 1;
        }
    }
    SelectionMetrics m;
    if (tp + fn > 0) {
        m.sensitivity = tp / (tp + fn);
    }
    if (tn + fp > 0) {
        m.specificity = tn / (tn + fp);
    }
    m.accuracy = truth.empty() ? 0.0 : (tp + tn) / static_cast<double>(truth.size());
    return m;
}

double effective_sample_size(std::span<const double> trace) {
    const auto n = trace.size();
    if (n < 10) {
        throw std::invalid_argument("effective sample size needs at least 10 draws");
    }
    const double N = static_cast<double>(n);
    double mean = 0.0;
    for (const double x : trace) {
        mean += x;
    }
    mean /= N;
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) {
            s += (trace[t] - mean) * (trace[t + lag] - mean);
        }
        return s / N;
    };
    const double var = autocov(0);
    if (!(var > 0.0)) {
        return N;
    }
    // sum of adjacent-pair autocorrelations while the pair sums stay positive
    double tau = -1.0;
    for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
        const double pair = autocov(2 * m) / var + autocov(2 * m + 1) / var;
        if (!(pair > 0.0)) {
            break;
        }
        tau += 2.0 * pair;
    }
    if (!(tau > 0.0)) {
        return N;
    }
    return std::min(N / tau, N);
}

std::vector<StabilityRow> stability_report(std::span<const MpmFit> fits,
                                           std::span<const std::string> names, double threshold) {
    if (fits.empty()) {
        throw std::invalid_argument("stability report needs at least one fit");
    }
    const std::size_t p = names.size();
    std::vector<StabilityRow> rows(p);
    for (std::size_t j = 0; j < p; ++j) {
        rows[j].name = names[j];
        std::vector<double> coefs;
        for (const auto& fit : fits) {
            if (fit.selected.size() != p) {
                throw std::invalid_argument("fit dimension does not match feature names");
            }
            if (fit.selected[j]) {
                coefs.push_back(fit.coefficients[j]);
            }
        }
        rows[j].frequency = static_cast<double>(coefs.size()) / static_cast<double>(fits.size());
        rows[j].stable = rows[j].frequency >= threshold;
        if (!coefs.empty()) {
            double mean = 0.0;
            for (const double c : coefs) {
                mean += c;
            }
            mean /= static_cast<double>(coefs.size());
            double ss = 0.0;
            for (const double c : coefs) {
                ss += (c - mean) * (c - mean);
            }
            rows[j].coef_mean = mean;
            rows[j].coef_sd = coefs.size() > 1 ? std::sqrt(ss / static_cast<double>(coefs.size() - 1)) : 0.0;
        }
    }
    return rows;
}

} // namespace mrfcox
