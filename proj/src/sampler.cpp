#include "mrfcox/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace mrfcox {

void McmcConfig::validate() const {
    if (iterations < 1 || warmup < 0 || warmup >= iterations) {
        throw std::invalid_argument("need 0 <= warmup < iterations");
    }
    if (thin < 1) {
        throw std::invalid_argument("thinning must be at least 1");
    }
    if (chains < 1) {
        throw std::invalid_argument("need at least one chain");
    }
    if (partition_K < 1) {
        throw std::invalid_argument("partition needs at least one interval");
    }
    if (!(curvature_floor > 0.0) || !(fallback_sd > 0.0)) {
        throw std::invalid_argument("curvature floor and fallback step must be positive");
    }
    priors.spike_slab.validate();
    priors.mrf.validate();
    if (!baseline_from_data) {
        priors.baseline.validate();
    } else if (!(priors.baseline.a0 > 0.0)) {
        throw std::invalid_argument("gamma-process weight a0 must be positive");
    }
}

McmcConfig McmcConfig::desk_profile() {
    return McmcConfig{};
}

McmcConfig McmcConfig::paper_profile() {
    McmcConfig config;
    config.iterations = 30000;
    config.warmup = 15000;
    config.thin = 6;
    return config;
}

SamplerModel::SamplerModel(const SurvivalDataset& data, const PriorGraph& graph, const McmcConfig& config)
    : data_(&data), graph_(&graph), config_(config) {
    config_.validate();
    data.validate();
    if (graph.p() != data.p()) {
        throw std::invalid_argument("graph has p=" + std::to_string(graph.p()) + " but data has p=" +
                                    std::to_string(data.p()));
    }
    partition_ = build_partition(data, config_.partition_K);
    sets_ = interval_sets(data, partition_);
    priors_ = config_.priors;
    if (config_.baseline_from_data) {
        priors_.baseline = default_baseline_for(data, config_.priors.baseline.a0);
    }
    increment_prior_ = hazard_increment_prior_params(priors_.baseline, partition_);
}

Index ChainState::model_size() const {
    return std::count(gamma.begin(), gamma.end(), std::uint8_t{1});
}

namespace {

double positive_gamma_draw(Engine& rng, double shape, double rate) {
    return std::max(draw_gamma(rng, shape, rate), std::numeric_limits<double>::min());
}

} // namespace

ChainState init_chain(const SamplerModel& model, int chain_id) {
    const Index p = model.data().p();
    const int K = model.partition().K();
    ChainState state;
    state.rng_seed = derive_seed(model.config().seed, static_cast<std::uint64_t>(chain_id));
    state.rng = Engine(state.rng_seed);
    state.gamma.assign(p, 0);
    state.beta.resize(p);
    const double tau = model.priors().spike_slab.tau;
    for (Index j = 0; j < p; ++j) {
        state.beta[j] = draw_normal(state.rng, 0.0, tau);
    }
    state.h.resize(K);
    for (int k = 0; k < K; ++k) {
        const auto& prior = model.increment_prior()[k];
        state.h[k] = positive_gamma_draw(state.rng, prior.shape, prior.rate);
    }
    state.accept_counts.assign(p, 0);
    state.proposal_counts.assign(p, 0);
    state.fallback_counts.assign(p, 0);
    state.log_lik = log_likelihood(state.beta, state.h, model.data(), model.sets());
    return state;
}

Chain::Chain(const SamplerModel& model, ChainState state)
    : model_(&model), state_(std::move(state)), ws_(model.data(), model.sets()) {
    ws_.set_beta(state_.beta);
    ws_.set_hazard(state_.h);
    state_.log_lik = ws_.log_likelihood();
    const Index p = model.data().p();
    Eigen::VectorXd g(p);
    for (Index j = 0; j < p; ++j) {
        g[j] = state_.gamma[j];
    }
    neighbour_field_ = model.graph().weights() * g;
}

void Chain::update_gamma() {
    const auto& graph = model_->graph().weights();
    const auto& priors = model_->priors();
    const Index p = model_->data().p();
    for (Index j = 0; j < p; ++j) {
        const double log_odds =
            gamma_include_log_odds(neighbour_field_[j], state_.beta[j], priors.mrf, priors.spike_slab);
        const std::uint8_t next = draw_uniform(state_.rng) < logistic(log_odds) ? 1 : 0;
        if (next != state_.gamma[j]) {
            const double sign = next ? 1.0 : -1.0;
            neighbour_field_ += sign * graph.col(j);
            state_.gamma[j] = next;
        }
    }
}

Chain::Proposal Chain::proposal_at(Index /*j*/, double value, const CoordinateDerivatives& lik,
                                   double prior_variance) const {
    const double first = lik.first - value / prior_variance;
    const double second = lik.second - 1.0 / prior_variance;
    const double variance = 1.0 / std::max(-second, model_->config().curvature_floor);
    const double mean = value + variance * first;
    if (!std::isfinite(mean) || !std::isfinite(variance)) {
        const double sd = model_->config().fallback_sd;
        return {value, sd * sd, true};
    }
    return {mean, variance, false};
}

double Chain::proposal_log_density(const Proposal& q, double x) {
    return normal_log_density(x, q.mean, q.variance);
}

double Chain::beta_log_acceptance_ratio(Index j, double proposal) const {
    const double current = state_.beta[j];
    const double prior_variance = model_->priors().spike_slab.variance(state_.gamma[j] != 0);
    const Proposal forward = proposal_at(j, current, ws_.derivatives(j), prior_variance);
    const ShiftEvaluation shifted = ws_.evaluate_shift(j, proposal - current);
    const Proposal backward = proposal_at(j, proposal, shifted.derivatives, prior_variance);
    return shifted.log_likelihood_delta + normal_log_density(proposal, 0.0, prior_variance) -
           normal_log_density(current, 0.0, prior_variance) + proposal_log_density(backward, current) -
           proposal_log_density(forward, proposal);
}

void Chain::update_beta() {
    const auto& ss = model_->priors().spike_slab;
    const Index p = model_->data().p();
    for (Index j = 0; j < p; ++j) {
        const double current = state_.beta[j];
        const double prior_variance = ss.variance(state_.gamma[j] != 0);
        const Proposal forward = proposal_at(j, current, ws_.derivatives(j), prior_variance);
        const double proposal = draw_normal(state_.rng, forward.mean, std::sqrt(forward.variance));
        const double delta = proposal - current;
        const ShiftEvaluation shifted = ws_.evaluate_shift(j, delta);
        const Proposal backward = proposal_at(j, proposal, shifted.derivatives, prior_variance);
        const double log_ratio = shifted.log_likelihood_delta +
                                 normal_log_density(proposal, 0.0, prior_variance) -
                                 normal_log_density(current, 0.0, prior_variance) +
                                 proposal_log_density(backward, current) -
                                 proposal_log_density(forward, proposal);
        ++state_.proposal_counts[j];
        if (forward.fallback) {
            ++state_.fallback_counts[j];
        }
        const double u = draw_uniform(state_.rng);
        if (std::isfinite(log_ratio) ? std::log(u) < log_ratio : log_ratio > 0.0) {
            ws_.shift_coordinate(j, delta);
            state_.beta[j] = proposal;
            state_.log_lik += shifted.log_likelihood_delta;
            ++state_.accept_counts[j];
        }
    }
}

void Chain::update_h() {
    const Eigen::VectorXd risk = ws_.censored_risk_sums();
    const auto& sets = model_->sets();
    const double a0 = model_->priors().baseline.a0;
    for (int k = 0; k < sets.K(); ++k) {
        const double shape = model_->increment_prior()[k].shape + sets.d_counts[k];
        const double rate = a0 + risk[k];
        state_.h[k] = positive_gamma_draw(state_.rng, shape, rate);
    }
    ws_.set_hazard(state_.h);
    state_.log_lik = ws_.log_likelihood();
}

void Chain::sweep() {
    update_gamma();
    update_beta();
    // full recompute bounds floating-point drift of the rank-one updates
    ws_.set_beta(state_.beta);
    update_h();
    ++state_.iteration;
}

double Chain::cache_drift() const {
    return state_.log_lik - log_likelihood(state_.beta, state_.h, model_->data(), model_->sets());
}

PosteriorSamples run_chain(const SamplerModel& model, int chain_id) {
    const auto& config = model.config();
    const Index p = model.data().p();
    const int K = model.partition().K();
    const int retained = config.retained();

    Chain chain(model, init_chain(model, chain_id));
    PosteriorSamples out;
    out.chain_id = chain_id;
    out.rng_seed = chain.state().rng_seed;
    out.beta_draws.resize(retained, p);
    out.gamma_draws.resize(retained, p);
    out.h_draws.resize(retained, K);
    out.loglik_trace.resize(retained);
    out.model_size_trace.resize(retained);

    int slot = 0;
    for (int l = 1; l <= config.iterations && slot < retained; ++l) {
        chain.sweep();
        if (l <= config.warmup || (l - config.warmup) % config.thin != 0) {
            continue;
        }
        const auto& s = chain.state();
        out.beta_draws.row(slot) = s.beta.transpose();
        for (Index j = 0; j < p; ++j) {
            out.gamma_draws(slot, j) = s.gamma[j];
        }
        out.h_draws.row(slot) = s.h.transpose();
        out.loglik_trace[slot] = s.log_lik;
        out.model_size_trace[slot] = static_cast<double>(s.model_size());
        ++slot;
    }
    const auto& s = chain.state();
    out.acceptance_rates.resize(p);
    for (Index j = 0; j < p; ++j) {
        out.acceptance_rates[j] = s.proposal_counts[j] > 0
                                      ? static_cast<double>(s.accept_counts[j]) / s.proposal_counts[j]
                                      : 0.0;
        out.fallback_proposals += s.fallback_counts[j];
    }
    return out;
}

std::vector<PosteriorSamples> run_chains_parallel(const SamplerModel& model, unsigned max_threads) {
    const int chains = model.config().chains;
    std::vector<PosteriorSamples> results(chains);
    unsigned workers = max_threads > 0 ? max_threads : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, static_cast<unsigned>(chains));

    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (int c = next.fetch_add(1); c < chains; c = next.fetch_add(1)) {
            try {
                results[c] = run_chain(model, c);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return results;
}

} // namespace mrfcox
