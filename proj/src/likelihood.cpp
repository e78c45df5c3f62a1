#include "mrfcox/likelihood.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mrfcox {

LikelihoodWorkspace::LikelihoodWorkspace(const SurvivalDataset& data, const IntervalSets& sets)
    : data_(&data),
      sets_(&sets),
      eta_(Eigen::VectorXd::Zero(data.n())),
      exp_eta_(Eigen::VectorXd::Ones(data.n())),
      exposure_(Eigen::VectorXd::Zero(data.n())),
      event_increment_(Eigen::VectorXd::Zero(data.n())),
      term_(Eigen::VectorXd::Zero(data.n())),
      term_first_(Eigen::VectorXd::Zero(data.n())),
      term_second_(Eigen::VectorXd::Zero(data.n())),
      scratch_exp_(data.n()),
      scratch_term_(data.n()),
      scratch_first_(data.n()),
      scratch_second_(data.n()) {
    if (static_cast<Index>(sets.subject_interval.size()) != data.n()) {
        throw std::invalid_argument("interval sets were built for a different dataset");
    }
}

LikelihoodWorkspace::SubjectTerms LikelihoodWorkspace::subject_terms(Index i, double e) const {
    // survival factor -exposure * e has both eta-derivatives equal to itself
    const double surv = -exposure_[i] * e;
    SubjectTerms t{surv, surv, surv};
    if (data_->events[i]) {
        const double mu = event_increment_[i] * e;
        if (mu == 0.0) {
            t.value = -std::numeric_limits<double>::infinity();
            t.first += 1.0;
            return t;
        }
        const double em = std::expm1(-mu);  // -(1 - e^-mu)
        const double ep = std::expm1(mu);
        t.value += std::log(-em);
        // d/deta log(1 - e^-mu) = mu / (e^mu - 1)
        const double first = mu / ep;
        // second derivative: first - mu^2 e^mu / (e^mu - 1)^2, without forming e^mu
        t.first += first;
        t.second += first - mu * mu / (ep * -em);
    }
    return t;
}

void LikelihoodWorkspace::refresh() {
    scratch_j_ = -1;
    for (Index i = 0; i < data_->n(); ++i) {
        const SubjectTerms t = subject_terms(i, exp_eta_[i]);
        term_[i] = t.value;
        term_first_[i] = t.first;
        term_second_[i] = t.second;
    }
}

void LikelihoodWorkspace::set_beta(const Eigen::VectorXd& beta) {
    if (beta.size() != data_->p()) {
        throw std::invalid_argument("coefficient vector length does not match covariates");
    }
    eta_.noalias() = data_->covariates * beta;
    exp_eta_ = eta_.unaryExpr([](double x) { return std::exp(x); });
    refresh();
}

void LikelihoodWorkspace::set_hazard(const Eigen::VectorXd& h) {
    if (h.size() != sets_->K()) {
        throw std::invalid_argument("hazard increment vector length does not match partition");
    }
    for (Index k = 0; k < h.size(); ++k) {
        if (!(h[k] > 0.0)) {
            throw std::invalid_argument("hazard increments must be strictly positive");
        }
    }
    Eigen::VectorXd before(h.size());
    double running = 0.0;
    for (Index k = 0; k < h.size(); ++k) {
        before[k] = running;
        running += h[k];
    }
    for (Index i = 0; i < data_->n(); ++i) {
        const int k = sets_->subject_interval[i];
        if (data_->events[i]) {
            exposure_[i] = before[k];
            event_increment_[i] = h[k];
        } else {
            exposure_[i] = before[k] + h[k];
            event_increment_[i] = 0.0;
        }
    }
    refresh();
}

ShiftEvaluation LikelihoodWorkspace::evaluate_shift(Index j, double delta) const {
    const auto x = data_->covariates.col(j);
    ShiftEvaluation out;
    for (Index i = 0; i < data_->n(); ++i) {
        const double xi = x[i];
        if (xi == 0.0) {
            scratch_exp_[i] = exp_eta_[i];
            scratch_term_[i] = term_[i];
            scratch_first_[i] = term_first_[i];
            scratch_second_[i] = term_second_[i];
            continue;
        }
        const double e = std::exp(eta_[i] + delta * xi);
        const SubjectTerms t = subject_terms(i, e);
        scratch_exp_[i] = e;
        scratch_term_[i] = t.value;
        scratch_first_[i] = t.first;
        scratch_second_[i] = t.second;
        out.log_likelihood_delta += t.value - term_[i];
        out.derivatives.first += t.first * xi;
        out.derivatives.second += t.second * xi * xi;
    }
    scratch_j_ = j;
    scratch_delta_ = delta;
    return out;
}

void LikelihoodWorkspace::shift_coordinate(Index j, double delta) {
    if (scratch_j_ != j || scratch_delta_ != delta) {
        evaluate_shift(j, delta);
    }
    eta_.noalias() += delta * data_->covariates.col(j);
    exp_eta_.swap(scratch_exp_);
    term_.swap(scratch_term_);
    term_first_.swap(scratch_first_);
    term_second_.swap(scratch_second_);
    scratch_j_ = -1;
}

double LikelihoodWorkspace::log_likelihood() const {
    return term_.sum();
}

double LikelihoodWorkspace::log_likelihood_delta(Index j, double delta) const {
    return evaluate_shift(j, delta).log_likelihood_delta;
}

CoordinateDerivatives LikelihoodWorkspace::derivatives(Index j, double delta) const {
    if (delta != 0.0) {
        return evaluate_shift(j, delta).derivatives;
    }
    // same summation order as evaluate_shift, so a null move is exactly symmetric
    const auto x = data_->covariates.col(j);
    CoordinateDerivatives d;
    for (Index i = 0; i < data_->n(); ++i) {
        const double xi = x[i];
        if (xi != 0.0) {
            d.first += term_first_[i] * xi;
            d.second += term_second_[i] * xi * xi;
        }
    }
    return d;
}

Eigen::VectorXd LikelihoodWorkspace::censored_risk_sums() const {
    const int K = sets_->K();
    // tally per failure interval, then accumulate from the last interval back
    Eigen::VectorXd leaving_after = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd censored_in = Eigen::VectorXd::Zero(K);
    for (Index i = 0; i < data_->n(); ++i) {
        const int k = sets_->subject_interval[i];
        leaving_after[k] += exp_eta_[i];
        if (!data_->events[i]) {
            censored_in[k] += exp_eta_[i];
        }
    }
    Eigen::VectorXd sums(K);
    double beyond = 0.0;
    for (int k = K - 1; k >= 0; --k) {
        sums[k] = beyond + censored_in[k];
        beyond += leaving_after[k];
    }
    return sums;
}

double log_likelihood(const Eigen::VectorXd& beta, const Eigen::VectorXd& h,
                      const SurvivalDataset& data, const IntervalSets& sets) {
    LikelihoodWorkspace ws(data, sets);
    ws.set_beta(beta);
    ws.set_hazard(h);
    return ws.log_likelihood();
}

CoordinateDerivatives log_likelihood_grad_hess_beta_j(Index j, const Eigen::VectorXd& beta,
                                                      const Eigen::VectorXd& h,
                                                      const SurvivalDataset& data,
                                                      const IntervalSets& sets,
                                                      double prior_variance) {
    if (j < 0 || j >= data.p()) {
        throw std::invalid_argument("coefficient index out of range");
    }
    LikelihoodWorkspace ws(data, sets);
    ws.set_beta(beta);
    ws.set_hazard(h);
    auto d = ws.derivatives(j);
    d.first -= beta[j] / prior_variance;
    d.second -= 1.0 / prior_variance;
    return d;
}

} // namespace mrfcox
