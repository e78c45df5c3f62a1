#pragma once

#include "mrfcox/datamodel.hpp"

namespace mrfcox {

struct CoordinateDerivatives {
    double first = 0.0;
    double second = 0.0;
};

struct ShiftEvaluation {
    double log_likelihood_delta = 0.0;
    CoordinateDerivatives derivatives;
};

/**
 * Grouped-data Cox log-likelihood for one chain.
 *
 * A subject whose time falls in interval k(i) is at risk through intervals
 * 1..k(i); it contributes -h_m exp(eta_i) for every interval where it is in
 * R_m \ D_m, and log(1 - exp(-h_k(i) exp(eta_i))) if it failed in k(i).
 * The workspace caches eta = X beta and exp(eta) together with each
 * subject's accumulated hazard exposure so that a single-coordinate change
 * costs O(n).
 */
class LikelihoodWorkspace {
public:
    LikelihoodWorkspace(const SurvivalDataset& data, const IntervalSets& sets);

    void set_beta(const Eigen::VectorXd& beta);
    void set_hazard(const Eigen::VectorXd& h);
    /// beta_j += delta, with a rank-one update of the cached predictors.
    void shift_coordinate(Index j, double delta);

    double log_likelihood() const;
    /// Change in log-likelihood if beta_j were shifted by delta.
    double log_likelihood_delta(Index j, double delta) const;
    /// Likelihood-only derivatives in beta_j at the current point shifted by delta.
    CoordinateDerivatives derivatives(Index j, double delta = 0.0) const;
    /// Both of the above at beta_j + delta in one pass.
    ShiftEvaluation evaluate_shift(Index j, double delta) const;

    /// sum over R_k \ D_k of exp(eta_l), per interval.
    Eigen::VectorXd censored_risk_sums() const;

    const Eigen::VectorXd& linear_predictors() const { return eta_; }
    const Eigen::VectorXd& exp_linear_predictors() const { return exp_eta_; }
    const IntervalSets& sets() const { return *sets_; }
    const SurvivalDataset& data() const { return *data_; }

private:
    struct SubjectTerms {
        double value;
        double first;
        double second;
    };
    SubjectTerms subject_terms(Index i, double exp_eta) const;
    void refresh();

    const SurvivalDataset* data_;
    const IntervalSets* sets_;
    Eigen::VectorXd eta_;
    Eigen::VectorXd exp_eta_;
    // sum of h over intervals where the subject sits in R \ D
    Eigen::VectorXd exposure_;
    // h of the failure interval for events, 0 otherwise
    Eigen::VectorXd event_increment_;
    // per-subject log-likelihood term and its eta-derivatives at eta_
    Eigen::VectorXd term_;
    Eigen::VectorXd term_first_;
    Eigen::VectorXd term_second_;

    // values at the last evaluated shift, reused when that shift is committed
    mutable Index scratch_j_ = -1;
    mutable double scratch_delta_ = 0.0;
    mutable Eigen::VectorXd scratch_exp_;
    mutable Eigen::VectorXd scratch_term_;
    mutable Eigen::VectorXd scratch_first_;
    mutable Eigen::VectorXd scratch_second_;
};

double log_likelihood(const Eigen::VectorXd& beta, const Eigen::VectorXd& h,
                      const SurvivalDataset& data, const IntervalSets& sets);

/// Derivatives in beta_j of log-likelihood plus the N(0, prior_variance)
/// log prior on beta_j.
CoordinateDerivatives log_likelihood_grad_hess_beta_j(Index j, const Eigen::VectorXd& beta,
                                                      const Eigen::VectorXd& h,
                                                      const SurvivalDataset& data,
                                                      const IntervalSets& sets,
                                                      double prior_variance);

} // namespace mrfcox
