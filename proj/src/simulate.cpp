#include "mrfcox/simulate.hpp"

#include "mrfcox/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace mrfcox {

namespace {

// stream ids under the root seed
constexpr std::uint64_t kBetaStream = 0x62657461;   // "beta"
constexpr std::uint64_t kNoiseStream = 0x6e6f6973;  // "nois"
constexpr std::uint64_t kReplicateBase = 0x1000;
constexpr int kTestReplicate = 1 << 20;

} // namespace

void SimulationSpec::validate() const {
    if (n < 2 || p < 1) {
        throw std::invalid_argument("simulation needs n >= 2 and p >= 1");
    }
    if (n_relevant > p || block_size > n_relevant || n_relevant < 0 || block_size < 0) {
        throw std::invalid_argument("need block_size <= n_relevant <= p");
    }
    if (!(block_rho > -1.0 / std::max<double>(1.0, static_cast<double>(block_size - 1))) || !(block_rho < 1.0)) {
        throw std::invalid_argument("block correlation does not give a positive-definite covariance");
    }
    if (!(beta_low <= beta_high)) {
        throw std::invalid_argument("coefficient range is empty");
    }
    if (!(weibull_eta > 0.0) || !(weibull_kappa > 0.0)) {
        throw std::invalid_argument("Weibull baseline parameters must be positive");
    }
    if (!(censor_rate_target >= 0.0) || !(censor_rate_target < 1.0)) {
        throw std::invalid_argument("censoring target must lie in [0, 1)");
    }
    if (n_datasets < 1) {
        throw std::invalid_argument("need at least one replicate");
    }
}

Eigen::MatrixXd make_covariance(const SimulationSpec& spec) {
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(spec.p, spec.p);
    for (Index i = 0; i < spec.block_size; ++i) {
        for (Index j = 0; j < spec.block_size; ++j) {
            if (i != j) {
                sigma(i, j) = spec.block_rho;
            }
        }
    }
    return sigma;
}

Eigen::VectorXd draw_true_beta(const SimulationSpec& spec) {
    Engine rng = make_engine(spec.seed, kBetaStream);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(spec.p);
    for (Index j = 0; j < spec.n_relevant; ++j) {
        beta[j] = spec.beta_low + (spec.beta_high - spec.beta_low) * draw_uniform(rng);
    }
    return beta;
}

int test_replicate_id() {
    return kTestReplicate;
}

double calibrate_censoring_rate(const Eigen::VectorXd& event_times, double target) {
    if (target <= 0.0) {
        return 0.0;
    }
    auto censored_fraction = [&](double rate) {
        return (1.0 - (-rate * event_times.array()).unaryExpr([](double x) { return std::exp(x); })).mean();
    };
    double lo = 0.0;
    double hi = 1.0;
    while (censored_fraction(hi) < target) {
        hi *= 2.0;
        if (hi > 1e300) {
            throw std::runtime_error("censoring rate calibration diverged");
        }
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (censored_fraction(mid) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

SimulatedData draw_dataset(const SimulationSpec& spec, int replicate_id) {
    spec.validate();
    SimulatedData out;
    out.beta_true = draw_true_beta(spec);
    out.truth.assign(spec.p, 0);
    for (Index j = 0; j < spec.n_relevant; ++j) {
        out.truth[j] = 1;
    }

    Engine rng = make_engine(spec.seed, kReplicateBase + static_cast<std::uint64_t>(replicate_id));
    const Eigen::MatrixXd chol = make_covariance(spec).llt().matrixL();
    Eigen::MatrixXd z(spec.n, spec.p);
    for (Index i = 0; i < spec.n; ++i) {
        for (Index j = 0; j < spec.p; ++j) {
            z(i, j) = draw_normal(rng, 0.0, 1.0);
        }
    }
    SurvivalDataset& data = out.data;
    data.covariates = z * chol.transpose();

    const Eigen::VectorXd eta = data.covariates * out.beta_true;
    Eigen::VectorXd event_times(spec.n);
    for (Index i = 0; i < spec.n; ++i) {
        // inverse transform of S(t) = exp(-eta_w t^kappa exp(x beta))
        const double u = draw_open_uniform(rng);
        event_times[i] = std::pow(-std::log(u) / (spec.weibull_eta * std::exp(eta[i])), 1.0 / spec.weibull_kappa);
    }
    const double rate = calibrate_censoring_rate(event_times, spec.censor_rate_target);
    data.times.resize(spec.n);
    data.events.resize(spec.n);
    for (Index i = 0; i < spec.n; ++i) {
        const double c = rate > 0.0 ? draw_exponential(rng, rate) : INFINITY;
        if (event_times[i] <= c) {
            data.times[i] = event_times[i];
            data.events[i] = 1;
        } else {
            data.times[i] = c;
            data.events[i] = 0;
        }
    }
    data.feature_names.resize(spec.p);
    for (Index j = 0; j < spec.p; ++j) {
        data.feature_names[j] = "x" + std::to_string(j + 1);
    }
    data.validate();
    return out;
}

const std::vector<std::string>& study_one_scenarios() {
    static const std::vector<std::string> names{"empty", "true", "uniform-k2", "block-5x5", "noise-100"};
    return names;
}

std::vector<NamedGraph> scenario_graphs(const SimulationSpec& spec) {
    spec.validate();
    const Eigen::MatrixXd omega = make_covariance(spec).inverse();
    const PriorGraph truth = from_precision_pattern(omega, 1e-8);

    auto block = [](Index size) {
        std::vector<Index> idx(size);
        for (Index i = 0; i < size; ++i) {
            idx[i] = i;
        }
        return idx;
    };
    const Index small = std::min<Index>(5, spec.block_size);
    const Index large = std::min<Index>(10, spec.block_size);

    std::vector<NamedGraph> graphs;
    graphs.push_back({"empty", empty_graph(spec.p)});
    graphs.push_back({"true", truth});
    for (const int k : {2, 4, 6, 9}) {
        graphs.push_back({"uniform-k" + std::to_string(k), remove_edges_uniform(truth, k)});
    }
    graphs.push_back({"block-5x5", remove_block_edges(truth, block(small), false)});
    graphs.push_back({"block-10x10", remove_block_edges(truth, block(large), false)});
    graphs.push_back({"block-5x5-plus", remove_block_edges(truth, block(small), true)});
    graphs.push_back({"block-10x10-plus", remove_block_edges(truth, block(large), true)});
    if (edge_count(truth) > 0) {
        const std::uint64_t noise_seed = derive_seed(spec.seed, kNoiseStream);
        graphs.push_back({"noise-50", add_false_edges(truth, 0.5, derive_seed(noise_seed, 50))});
        graphs.push_back({"noise-100", add_false_edges(truth, 1.0, derive_seed(noise_seed, 100))});
        graphs.push_back({"noise-200", add_false_edges(truth, 2.0, derive_seed(noise_seed, 200))});
    }
    return graphs;
}

} // namespace mrfcox
