#pragma once

#include "mrfcox/datamodel.hpp"
#include "mrfcox/summary.hpp"

#include <functional>
#include <span>
#include <vector>

namespace mrfcox {

/// Which one-sided value of a right-continuous step quantity to evaluate.
enum class Side { right, left };

/**
 * Predicted survival S(t | X) = exp(-H0(t) exp(X beta)) for a set of
 * subjects. H0 interpolates the cumulative hazard increments linearly within
 * each interval and continues with the last interval's rate beyond c_K.
 */
class SurvivalCurve {
public:
    SurvivalCurve(std::vector<double> cuts, std::vector<double> increments,
                  Eigen::VectorXd linear_predictors);

    Index subjects() const { return linear_predictors_.size(); }
    double baseline_cumulative_hazard(double t) const;
    double cumulative_hazard(Index i, double t) const;
    double survival(Index i, double t) const;
    /// True when t lies past the last cut and the hazard was extrapolated.
    bool extrapolated(double t) const { return t > cuts_.back(); }
    const std::vector<double>& cuts() const { return cuts_; }

private:
    std::vector<double> cuts_;
    std::vector<double> increments_;
    std::vector<double> cumulative_at_cut_;
    Eigen::VectorXd linear_predictors_;
};

SurvivalCurve predict_survival(const MpmFit& fit, std::span<const double> h_mean,
                               const TimePartition& partition, const Eigen::MatrixXd& newdata);
/// Uses the posterior-mean increments stored in the fit.
SurvivalCurve predict_survival(const MpmFit& fit, const TimePartition& partition,
                               const Eigen::MatrixXd& newdata);

/// Right-continuous step function given by jump times and the value held
/// from each jump onward; value 1 before the first jump.
class StepFunction {
public:
    StepFunction() = default;
    StepFunction(std::vector<double> times, std::vector<double> values);

    double operator()(double t) const;
    /// Left limit f(t-).
    double left(double t) const;
    const std::vector<double>& times() const { return times_; }

private:
    std::vector<double> times_;
    std::vector<double> values_;
};

/// Kaplan-Meier estimate of the event-free probability.
StepFunction kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events);
/// Kaplan-Meier with the censoring indicator reversed.
StepFunction km_censoring(const SurvivalDataset& data);

struct BrierResult {
    double value = 0.0;
    Index excluded = 0;
};

/// IPCW Brier score. `predicted(i)` is the predicted survival of test
/// subject i at t (or at t- for Side::left).
BrierResult brier_score(double t, const std::function<double(Index, double, Side)>& predicted,
                        const SurvivalDataset& data, const StepFunction& censoring,
                        Side side = Side::right);

BrierResult brier_score(double t, const SurvivalCurve& curve, const SurvivalDataset& data,
                        const StepFunction& censoring);

/// Trapezoid rule on a sorted grid, using right limits at the left end of
/// each panel and left limits at the right end. Exact for integrands that
/// are linear between grid points; jumps must sit on grid points.
double integrate_panels(std::span<const double> grid, const std::function<double(double, Side)>& f);

/// Grid of 0, observed times and partition cuts inside [0, t_star], and t_star.
std::vector<double> ibs_grid(const SurvivalDataset& data, std::span<const double> cuts, double t_star);

double integrated_brier_score(double t_star, const std::function<double(Index, double, Side)>& predicted,
                              const SurvivalDataset& data, const StepFunction& censoring,
                              std::span<const double> cuts = {});

double integrated_brier_score(double t_star, const SurvivalCurve& curve, const SurvivalDataset& data,
                              const StepFunction& censoring);

/// IBS of the covariate-free Kaplan-Meier fit on `train`, scored on `test`.
double km_reference_ibs(const SurvivalDataset& train, const SurvivalDataset& test, double t_star);

/// 95th percentile (type 7) of the observed times.
double default_t_star(const SurvivalDataset& data);

} // namespace mrfcox
