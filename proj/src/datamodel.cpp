#include "mrfcox/datamodel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace mrfcox {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back();
    }
    return fields;
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\"");
    if (first == std::string::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\"");
    return s.substr(first, last - first + 1);
}

double parse_number(const std::string& raw, std::size_t row, std::size_t col,
                    const std::string& column_name) {
    const std::string text = trim(raw);
    double value = 0.0;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (!text.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (text.empty() || ec != std::errc{} || ptr != end) {
        throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(col) +
                         " ('" + column_name + "'): non-numeric value '" + text + "'");
    }
    return value;
}

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, ptr);
}

} // namespace

Index SurvivalDataset::event_count() const {
    return std::count(events.begin(), events.end(), std::uint8_t{1});
}

void SurvivalDataset::validate() const {
    if (n() < 2) {
        throw std::invalid_argument("dataset needs at least 2 subjects");
    }
    if (p() < 1) {
        throw std::invalid_argument("dataset needs at least 1 covariate");
    }
    if (static_cast<Index>(events.size()) != n() || covariates.rows() != n()) {
        throw std::invalid_argument("dataset columns have inconsistent lengths");
    }
    if (static_cast<Index>(feature_names.size()) != p()) {
        throw std::invalid_argument("feature name count does not match covariate columns");
    }
    for (Index i = 0; i < n(); ++i) {
        if (!std::isfinite(times[i]) || times[i] <= 0.0) {
            throw std::invalid_argument("time of subject " + std::to_string(i + 1) +
                                        " is not strictly positive and finite");
        }
        if (events[i] > 1) {
            throw std::invalid_argument("status of subject " + std::to_string(i + 1) +
                                        " is not 0 or 1");
        }
    }
    if (!covariates.allFinite()) {
        throw std::invalid_argument("covariate matrix contains non-finite entries");
    }
}

SurvivalDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open dataset file '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError("dataset file '" + path.string() + "' is empty");
    }
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) {
        h = trim(h);
    }
    if (header.size() < 3 || header[0] != "time" || header[1] != "status") {
        throw ParseError("header must start with 'time,status' followed by at least one feature column");
    }
    const std::size_t p = header.size() - 2;

    std::vector<double> times;
    std::vector<std::uint8_t> events;
    std::vector<double> values;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != header.size()) {
            throw ParseError("row " + std::to_string(row) + ": expected " +
                             std::to_string(header.size()) + " columns, found " +
                             std::to_string(fields.size()));
        }
        const double t = parse_number(fields[0], row, 1, "time");
        if (!std::isfinite(t) || t <= 0.0) {
            throw ParseError("row " + std::to_string(row) + ", column 1 ('time'): time must be "
                             "strictly positive and finite, got " + trim(fields[0]));
        }
        const double s = parse_number(fields[1], row, 2, "status");
        if (s != 0.0 && s != 1.0) {
            throw ParseError("row " + std::to_string(row) + ", column 2 ('status'): status must be "
                             "0 or 1, got " + trim(fields[1]));
        }
        times.push_back(t);
        events.push_back(static_cast<std::uint8_t>(s));
        for (std::size_t c = 2; c < fields.size(); ++c) {
            const double v = parse_number(fields[c], row, c + 1, header[c]);
            if (!std::isfinite(v)) {
                throw ParseError("row " + std::to_string(row) + ", column " + std::to_string(c + 1) +
                                 " ('" + header[c] + "'): non-finite value");
            }
            values.push_back(v);
        }
    }

    SurvivalDataset data;
    const auto n = static_cast<Index>(times.size());
    data.times = Eigen::Map<const Eigen::VectorXd>(times.data(), n);
    data.events = std::move(events);
    data.covariates = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        values.data(), n, static_cast<Index>(p));
    data.feature_names.assign(header.begin() + 2, header.end());
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return data;
}

void write_dataset(const SurvivalDataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write dataset file '" + path.string() + "'");
    }
    out << "time,status";
    for (const auto& name : data.feature_names) {
        out << ',' << name;
    }
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        out << format_double(data.times[i]) << ',' << static_cast<int>(data.events[i]);
        for (Index j = 0; j < data.p(); ++j) {
            out << ',' << format_double(data.covariates(i, j));
        }
        out << '\n';
    }
}

int TimePartition::interval_of(double t) const {
    if (cuts.size() < 2 || t < 0.0 || t > cuts.back()) {
        return -1;
    }
    if (t == cuts.back()) {
        return K() - 1;
    }
    const auto it = std::upper_bound(cuts.begin(), cuts.end(), t);
    return static_cast<int>(it - cuts.begin()) - 1;
}

TimePartition TimePartition::from_cuts(std::vector<double> cuts) {
    if (cuts.size() < 2 || cuts.front() != 0.0) {
        throw std::invalid_argument("partition needs c_0 = 0 and at least one interval");
    }
    for (std::size_t k = 1; k < cuts.size(); ++k) {
        if (!(cuts[k] > cuts[k - 1])) {
            throw std::invalid_argument("partition cuts must be strictly increasing");
        }
    }
    TimePartition partition;
    partition.cuts = std::move(cuts);
    partition.requested_intervals = partition.K();
    return partition;
}

TimePartition build_partition(const SurvivalDataset& data, int K) {
    if (K < 1) {
        throw std::invalid_argument("number of intervals must be at least 1");
    }
    std::vector<double> sorted(data.times.data(), data.times.data() + data.n());
    std::sort(sorted.begin(), sorted.end());
    const double t_max = sorted.back();
    const auto n = static_cast<double>(sorted.size());

    TimePartition partition;
    partition.requested_intervals = K;
    partition.cuts.push_back(0.0);
    for (int j = 1; j < K; ++j) {
        // type-7 quantile: linear interpolation between order statistics
        const double h = (n - 1.0) * static_cast<double>(j) / static_cast<double>(K);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
        const double q = sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
        if (q > partition.cuts.back() && q < t_max) {
            partition.cuts.push_back(q);
        }
    }
    partition.cuts.push_back(t_max * (1.0 + 1e-6));
    return partition;
}

IntervalSets interval_sets(const SurvivalDataset& data, const TimePartition& partition) {
    const int K = partition.K();
    IntervalSets sets;
    sets.risk_sets.resize(K);
    sets.failure_sets.resize(K);
    sets.d_counts.assign(K, 0);
    sets.subject_interval.resize(data.n());
    for (Index i = 0; i < data.n(); ++i) {
        const int k = partition.interval_of(data.times[i]);
        if (k < 0) {
            throw std::invalid_argument("subject " + std::to_string(i + 1) +
                                        " has a time outside the partition");
        }
        sets.subject_interval[i] = k;
    }
    for (int k = 0; k < K; ++k) {
        for (Index i = 0; i < data.n(); ++i) {
            const int ki = sets.subject_interval[i];
            if (ki >= k) {
                sets.risk_sets[k].push_back(i);
            }
            if (ki == k && data.events[i] == 1) {
                sets.failure_sets[k].push_back(i);
            }
        }
        sets.d_counts[k] = static_cast<int>(sets.failure_sets[k].size());
    }
    return sets;
}

} // namespace mrfcox
