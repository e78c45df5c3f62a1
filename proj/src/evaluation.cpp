#include "mrfcox/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mrfcox {

SurvivalCurve::SurvivalCurve(std::vector<double> cuts, std::vector<double> increments,
                             Eigen::VectorXd linear_predictors)
    : cuts_(std::move(cuts)), increments_(std::move(increments)),
      linear_predictors_(std::move(linear_predictors)) {
    if (cuts_.size() < 2 || increments_.size() + 1 != cuts_.size()) {
        throw std::invalid_argument("need one hazard increment per partition interval");
    }
    cumulative_at_cut_.resize(cuts_.size());
    cumulative_at_cut_[0] = 0.0;
    for (std::size_t k = 0; k < increments_.size(); ++k) {
        if (!(increments_[k] >= 0.0)) {
            throw std::invalid_argument("hazard increments must be nonnegative");
        }
        cumulative_at_cut_[k + 1] = cumulative_at_cut_[k] + increments_[k];
    }
}

double SurvivalCurve::baseline_cumulative_hazard(double t) const {
    if (t <= 0.0) {
        return 0.0;
    }
    const std::size_t K = increments_.size();
    if (t >= cuts_.back()) {
        const double rate = increments_[K - 1] / (cuts_[K] - cuts_[K - 1]);
        return cumulative_at_cut_[K] + rate * (t - cuts_[K]);
    }
    const auto it = std::upper_bound(cuts_.begin(), cuts_.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - cuts_.begin()); // t in [c_{k-1}, c_k)
    const double frac = (t - cuts_[k - 1]) / (cuts_[k] - cuts_[k - 1]);
    return cumulative_at_cut_[k - 1] + increments_[k - 1] * frac;
}

double SurvivalCurve::cumulative_hazard(Index i, double t) const {
    return baseline_cumulative_hazard(t) * std::exp(linear_predictors_[i]);
}

double SurvivalCurve::survival(Index i, double t) const {
    return std::exp(-cumulative_hazard(i, t));
}

SurvivalCurve predict_survival(const MpmFit& fit, std::span<const double> h_mean,
                               const TimePartition& partition, const Eigen::MatrixXd& newdata) {
    const auto p = static_cast<Index>(fit.coefficients.size());
    if (newdata.cols() != p) {
        throw std::invalid_argument("new data has " + std::to_string(newdata.cols()) +
                                    " columns, fit has " + std::to_string(p));
    }
    if (static_cast<int>(h_mean.size()) != partition.K()) {
        throw std::invalid_argument("hazard increments do not match the partition");
    }
    const Eigen::Map<const Eigen::VectorXd> beta(fit.coefficients.data(), p);
    return SurvivalCurve(partition.cuts, std::vector<double>(h_mean.begin(), h_mean.end()),
                         newdata * beta);
}

SurvivalCurve predict_survival(const MpmFit& fit, const TimePartition& partition,
                               const Eigen::MatrixXd& newdata) {
    return predict_survival(fit, fit.h_mean, partition, newdata);
}

StepFunction::StepFunction(std::vector<double> times, std::vector<double> values)
    : times_(std::move(times)), values_(std::move(values)) {
    if (times_.size() != values_.size()) {
        throw std::invalid_argument("step function needs one value per jump time");
    }
}

double StepFunction::operator()(double t) const {
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    return it == times_.begin() ? 1.0 : values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

double StepFunction::left(double t) const {
    const auto it = std::lower_bound(times_.begin(), times_.end(), t);
    return it == times_.begin() ? 1.0 : values_[static_cast<std::size_t>(it - times_.begin()) - 1];
}

StepFunction kaplan_meier(std::span<const double> times, std::span<const std::uint8_t> events) {
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return times[a] < times[b]; });
    std::vector<double> jump_times;
    std::vector<double> values;
    double surv = 1.0;
    std::size_t at_risk = times.size();
    for (std::size_t pos = 0; pos < order.size();) {
        const double t = times[order[pos]];
        std::size_t tied = 0;
        std::size_t failures = 0;
        while (pos + tied < order.size() && times[order[pos + tied]] == t) {
            failures += events[order[pos + tied]];
            ++tied;
        }
        if (failures > 0) {
            surv *= 1.0 - static_cast<double>(failures) / static_cast<double>(at_risk);
            jump_times.push_back(t);
            values.push_back(surv);
        }
        at_risk -= tied;
        pos += tied;
    }
    return StepFunction(std::move(jump_times), std::move(values));
}

StepFunction km_censoring(const SurvivalDataset& data) {
    std::vector<std::uint8_t> censored(data.events.size());
    for (std::size_t i = 0; i < censored.size(); ++i) {
        censored[i] = data.events[i] ? 0 : 1;
    }
    return kaplan_meier(std::span<const double>(data.times.data(), data.n()), censored);
}

BrierResult brier_score(double t, const std::function<double(Index, double, Side)>& predicted,
                        const SurvivalDataset& data, const StepFunction& censoring, Side side) {
    if (t < 0.0) {
        throw std::invalid_argument("Brier score needs t >= 0");
    }
    BrierResult result;
    double total = 0.0;
    const double g_t = side == Side::right ? censoring(t) : censoring.left(t);
    for (Index i = 0; i < data.n(); ++i) {
        const double ti = data.times[i];
        const bool alive = side == Side::right ? ti > t : ti >= t;
        double weight = 0.0;
        if (alive) {
            if (g_t <= 0.0) {
                ++result.excluded;
                continue;
            }
            weight = 1.0 / g_t;
        } else if (data.events[i]) {
            const double g_ti = censoring.left(ti);
            if (g_ti <= 0.0) {
                ++result.excluded;
                continue;
            }
            weight = 1.0 / g_ti;
        }
        const double residual = (alive ? 1.0 : 0.0) - predicted(i, t, side);
        total += weight * residual * residual;
    }
    const Index used = data.n() - result.excluded;
    result.value = used > 0 ? total / static_cast<double>(used) : 0.0;
    return result;
}

BrierResult brier_score(double t, const SurvivalCurve& curve, const SurvivalDataset& data,
                        const StepFunction& censoring) {
    return brier_score(
        t, [&](Index i, double s, Side) { return curve.survival(i, s); }, data, censoring);
}

double integrate_panels(std::span<const double> grid, const std::function<double(double, Side)>& f) {
    double area = 0.0;
    for (std::size_t m = 0; m + 1 < grid.size(); ++m) {
        const double a = grid[m];
        const double b = grid[m + 1];
        if (b <= a) {
            continue;
        }
        area += 0.5 * (b - a) * (f(a, Side::right) + f(b, Side::left));
    }
    return area;
}

std::vector<double> ibs_grid(const SurvivalDataset& data, std::span<const double> cuts, double t_star) {
    std::vector<double> grid{0.0, t_star};
    for (Index i = 0; i < data.n(); ++i) {
        if (data.times[i] < t_star) {
            grid.push_back(data.times[i]);
        }
    }
    for (const double c : cuts) {
        if (c > 0.0 && c < t_star) {
            grid.push_back(c);
        }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

double integrated_brier_score(double t_star, const std::function<double(Index, double, Side)>& predicted,
                              const SurvivalDataset& data, const StepFunction& censoring,
                              std::span<const double> cuts) {
    if (!(t_star > 0.0)) {
        throw std::invalid_argument("integration horizon t* must be positive");
    }
    const auto grid = ibs_grid(data, cuts, t_star);
    const double area = integrate_panels(grid, [&](double t, Side side) {
        return brier_score(t, predicted, data, censoring, side).value;
    });
    return area / t_star;
}

double integrated_brier_score(double t_star, const SurvivalCurve& curve, const SurvivalDataset& data,
                              const StepFunction& censoring) {
    // the model curve is smooth between jumps, so the panels get a uniform mesh on top
    constexpr int mesh = 1000;
    std::vector<double> points = curve.cuts();
    for (int m = 1; m < mesh; ++m) {
        points.push_back(t_star * m / mesh);
    }
    return integrated_brier_score(
        t_star, [&](Index i, double t, Side) { return curve.survival(i, t); }, data, censoring,
        points);
}

double km_reference_ibs(const SurvivalDataset& train, const SurvivalDataset& test, double t_star) {
    const StepFunction km =
        kaplan_meier(std::span<const double>(train.times.data(), train.n()), train.events);
    const StepFunction censoring = km_censoring(test);
    std::vector<double> jumps = km.times();
    return integrated_brier_score(
        t_star, [&](Index, double t, Side side) { return side == Side::right ? km(t) : km.left(t); },
        test, censoring, jumps);
}

double default_t_star(const SurvivalDataset& data) {
    std::vector<double> sorted(data.times.data(), data.times.data() + data.n());
    std::sort(sorted.begin(), sorted.end());
    const double h = 0.95 * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

} // namespace mrfcox
