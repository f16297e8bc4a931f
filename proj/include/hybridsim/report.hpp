#pragma once

#include "hybridsim/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace hybridsim {

inline constexpr const char* kResultsHeader =
    "design,scenario,bias_b,true_bias,coverage,power,mean_person_years,mean_inclusion_fraction,iterations";

void write_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
/// Parses the format written by write_csv; throws IoError.
std::vector<MetricsRow> read_csv(std::istream& is);
std::vector<MetricsRow> read_csv(const std::filesystem::path& path);

nlohmann::json to_json(const MetricsRow& row);
nlohmann::json to_json(const EsCvtmleResult& result);

/// Writes results.csv and results.json into `dir` (created if missing).
/// Wall-clock time is kept out of both so reruns are byte-identical.
void emit_tables(const std::vector<MetricsRow>& rows, const nlohmann::json& metadata,
                 const std::filesystem::path& dir);
void emit_timing(double wall_seconds, int parallelism, const std::filesystem::path& dir);

/// Three-panel SVG: coverage, power and mean person-years against the
/// absolute oracle bias.
std::string render_plot(const std::vector<MetricsRow>& rows);
void emit_plot(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

}  // namespace hybridsim
