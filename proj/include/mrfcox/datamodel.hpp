#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace mrfcox {

using Index = Eigen::Index;

/// Raised when an input file cannot be parsed; the message names the
/// offending row and column.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Right-censored survival data: observed times, event indicators
 * (1 = event, 0 = censored) and an n-by-p design matrix.
 */
struct SurvivalDataset {
    Eigen::VectorXd times;
    std::vector<std::uint8_t> events;
    Eigen::MatrixXd covariates;
    std::vector<std::string> feature_names;

    Index n() const { return times.size(); }
    Index p() const { return covariates.cols(); }
    Index event_count() const;

    /// Throws std::invalid_argument if any invariant is violated.
    void validate() const;
};

SurvivalDataset load_dataset(const std::filesystem::path& path);

/// Writes `time,status,<features...>` with 17 significant digits so that
/// load_dataset reproduces the values exactly.
void write_dataset(const SurvivalDataset& data, const std::filesystem::path& path);

/// Cut points 0 = c_0 < c_1 < ... < c_K with c_K strictly above the largest
/// observed time. Interval k (1-based) is [c_{k-1}, c_k).
struct TimePartition {
    std::vector<double> cuts;
    int requested_intervals = 0;

    int K() const { return static_cast<int>(cuts.size()) - 1; }
    bool collapsed() const { return requested_intervals != K(); }

    /// 0-based interval containing t; t == c_K maps to the last interval.
    /// Returns -1 when t is outside [0, c_K].
    int interval_of(double t) const;

    static TimePartition from_cuts(std::vector<double> cuts);
};

/// Quantile partition of the observed times. Internal cuts are the type-7
/// empirical quantiles at levels j/K; duplicate cuts and cuts at or above the
/// maximum time are collapsed, so K() may be smaller than requested.
TimePartition build_partition(const SurvivalDataset& data, int K);

/// Risk and failure sets per interval. All indices are 0-based.
struct IntervalSets {
    std::vector<std::vector<Index>> risk_sets;
    std::vector<std::vector<Index>> failure_sets;
    std::vector<int> d_counts;
    /// 0-based interval of each subject's observed time.
    std::vector<int> subject_interval;

    int K() const { return static_cast<int>(d_counts.size()); }
};

IntervalSets interval_sets(const SurvivalDataset& data, const TimePartition& partition);

} // namespace mrfcox
