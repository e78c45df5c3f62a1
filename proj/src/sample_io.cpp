#include "mrfcox/sample_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mrfcox {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

namespace {

std::vector<std::vector<double>> read_numeric_csv(const fs::path& path, std::vector<std::string>* header) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::string line;
    std::getline(in, line);
    if (header) {
        header->clear();
        std::istringstream h(line);
        std::string field;
        while (std::getline(h, field, ',')) {
            header->push_back(field);
        }
    }
    std::vector<std::vector<double>> rows;
    std::size_t row_no = 1;
    while (std::getline(in, line)) {
        ++row_no;
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::istringstream fields(line);
        std::string field;
        while (std::getline(fields, field, ',')) {
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
            if (ec != std::errc{} || ptr != field.data() + field.size()) {
                throw ParseError(path.string() + ": row " + std::to_string(row_no) + ": bad number '" + field + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

template <class Matrix>
std::string matrix_csv(const Matrix& m, const std::vector<std::string>& header) {
    std::ostringstream out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        out << (c ? "," : "") << header[c];
    }
    out << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) {
                out << ',';
            }
            if constexpr (std::is_same_v<typename Matrix::Scalar, std::uint8_t>) {
                out << static_cast<int>(m(r, c));
            } else {
                out << format_double(m(r, c));
            }
        }
        out << '\n';
    }
    return out.str();
}

} // namespace

void write_text_atomic(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) {
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        }
        out << contents;
        if (!out) {
            throw std::runtime_error("failed writing '" + tmp.string() + "'");
        }
    }
    fs::rename(tmp, path);
}

void write_json_atomic(const fs::path& path, const nlohmann::json& j) {
    write_text_atomic(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_samples(const PosteriorSamples& samples, const fs::path& dir,
                   const std::vector<std::string>& feature_names) {
    fs::create_directories(dir);
    std::vector<std::string> h_names;
    for (Index k = 0; k < samples.h_draws.cols(); ++k) {
        h_names.push_back("h" + std::to_string(k + 1));
    }
    write_text_atomic(dir / "beta.csv", matrix_csv(samples.beta_draws, feature_names));
    write_text_atomic(dir / "gamma.csv", matrix_csv(samples.gamma_draws, feature_names));
    write_text_atomic(dir / "h.csv", matrix_csv(samples.h_draws, h_names));
    Eigen::MatrixXd trace(samples.retained(), 2);
    trace.col(0) = samples.loglik_trace;
    trace.col(1) = samples.model_size_trace;
    write_text_atomic(dir / "trace.csv", matrix_csv(trace, {"loglik", "model_size"}));
}

PosteriorSamples read_samples(const fs::path& dir) {
    auto to_matrix = [](const std::vector<std::vector<double>>& rows, Index cols) {
        Eigen::MatrixXd m(static_cast<Index>(rows.size()), cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (static_cast<Index>(rows[r].size()) != cols) {
                throw ParseError("sample file row " + std::to_string(r + 2) + " has the wrong width");
            }
            for (Index c = 0; c < cols; ++c) {
                m(static_cast<Index>(r), c) = rows[r][c];
            }
        }
        return m;
    };
    std::vector<std::string> header;
    PosteriorSamples s;
    auto beta_rows = read_numeric_csv(dir / "beta.csv", &header);
    s.beta_draws = to_matrix(beta_rows, static_cast<Index>(header.size()));
    auto gamma_rows = read_numeric_csv(dir / "gamma.csv", &header);
    s.gamma_draws = to_matrix(gamma_rows, static_cast<Index>(header.size())).cast<std::uint8_t>();
    auto h_rows = read_numeric_csv(dir / "h.csv", &header);
    s.h_draws = to_matrix(h_rows, static_cast<Index>(header.size()));
    auto trace_rows = read_numeric_csv(dir / "trace.csv", &header);
    const Eigen::MatrixXd trace = to_matrix(trace_rows, 2);
    s.loglik_trace = trace.col(0);
    s.model_size_trace = trace.col(1);
    if (s.gamma_draws.rows() != s.beta_draws.rows() || s.h_draws.rows() != s.beta_draws.rows() ||
        trace.rows() != s.beta_draws.rows()) {
        throw ParseError(dir.string() + ": sample files disagree on the number of draws");
    }
    return s;
}

nlohmann::json mpm_to_json(const MpmFit& fit, const std::vector<std::string>& feature_names,
                           const TimePartition& partition) {
    nlohmann::json j;
    j["feature_names"] = feature_names;
    j["inclusion_probs"] = fit.inclusion_probs;
    j["selected"] = fit.selected;
    j["coefficients"] = fit.coefficients;
    j["model_size"] = fit.model_size;
    j["h_mean"] = fit.h_mean;
    j["cuts"] = partition.cuts;
    std::vector<std::string> selected_names;
    for (std::size_t i = 0; i < fit.selected.size(); ++i) {
        if (fit.selected[i]) {
            selected_names.push_back(feature_names[i]);
        }
    }
    j["selected_features"] = selected_names;
    return j;
}

MpmFit mpm_from_json(const nlohmann::json& j, TimePartition* partition) {
    MpmFit fit;
    try {
        fit.inclusion_probs = j.at("inclusion_probs").get<std::vector<double>>();
        fit.selected = j.at("selected").get<std::vector<std::uint8_t>>();
        fit.coefficients = j.at("coefficients").get<std::vector<double>>();
        fit.model_size = j.at("model_size").get<Index>();
        fit.h_mean = j.at("h_mean").get<std::vector<double>>();
        if (partition) {
            *partition = TimePartition::from_cuts(j.at("cuts").get<std::vector<double>>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed fit file: ") + e.what());
    }
    return fit;
}

nlohmann::json diagnostics_to_json(std::span<const PosteriorSamples> chains) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : chains) {
        nlohmann::json c;
        c["chain"] = s.chain_id;
        c["retained"] = s.retained();
        if (s.retained() >= 10) {
            c["ess_model_size"] = effective_sample_size(
                std::span<const double>(s.model_size_trace.data(), s.model_size_trace.size()));
            c["ess_loglik"] = effective_sample_size(
                std::span<const double>(s.loglik_trace.data(), s.loglik_trace.size()));
        }
        if (s.retained() > 0) {
            c["model_size_mean"] = s.model_size_trace.mean();
            c["loglik_mean"] = s.loglik_trace.mean();
            c["loglik_min"] = s.loglik_trace.minCoeff();
            c["loglik_max"] = s.loglik_trace.maxCoeff();
        }
        if (!s.acceptance_rates.empty()) {
            double mean = 0.0;
            for (const double a : s.acceptance_rates) {
                mean += a;
            }
            c["acceptance_rate_mean"] = mean / static_cast<double>(s.acceptance_rates.size());
            c["acceptance_rates"] = s.acceptance_rates;
            c["fallback_proposals"] = s.fallback_proposals;
        }
        out.push_back(c);
    }
    return nlohmann::json{{"chains", out}};
}

} // namespace mrfcox
