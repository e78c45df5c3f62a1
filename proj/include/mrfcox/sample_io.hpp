#pragma once

#include "mrfcox/evaluation.hpp"
#include "mrfcox/sampler.hpp"
#include "mrfcox/summary.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>

namespace mrfcox {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

/// Writes beta.csv, gamma.csv, h.csv and trace.csv into `dir`.
void write_samples(const PosteriorSamples& samples, const std::filesystem::path& dir,
                   const std::vector<std::string>& feature_names);
PosteriorSamples read_samples(const std::filesystem::path& dir);

nlohmann::json mpm_to_json(const MpmFit& fit, const std::vector<std::string>& feature_names,
                           const TimePartition& partition);
/// Inverse of mpm_to_json; also returns the stored partition.
MpmFit mpm_from_json(const nlohmann::json& j, TimePartition* partition = nullptr);

nlohmann::json diagnostics_to_json(std::span<const PosteriorSamples> chains);

/// Writes to a temporary sibling and renames over the target.
void write_text_atomic(const std::filesystem::path& path, const std::string& contents);
void write_json_atomic(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

} // namespace mrfcox
