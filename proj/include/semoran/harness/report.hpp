#pragma once

#include "semoran/harness/experiment.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace semoran::harness {

/// Lines starting with '#' are comments; everything else is the body that
/// reruns must reproduce byte for byte.
std::string csv_body(const std::string& text);

std::string sweep_csv(const SweepReport& report, const RunConfig& config, const std::string& generated_at);
std::string snr_csv(const SweepReport& report, const std::string& generated_at);
std::string cdf_csv(const loc::ErrorReport& report);
std::string errors_csv(const loc::ErrorReport& report);

/// Parses an errors_<name>.csv file back into a report.
loc::ErrorReport read_errors_csv(const std::filesystem::path& path);
/// Reads a cdf CSV; throws std::runtime_error when malformed.
std::vector<std::pair<double, double>> read_cdf_csv(const std::filesystem::path& path);
bool cdf_valid(const std::vector<std::pair<double, double>>& cdf);

/// One JSON object per line: the effective config, then one record per row.
std::string sweep_summary_jsonl(const SweepReport& report, const RunConfig& config);
std::string config_json_line(const RunConfig& config, const std::string& command);

std::string utc_timestamp();

}  // namespace semoran::harness
