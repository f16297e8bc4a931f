#pragma once

#include "hybridsim/designs.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybridsim {

enum class Scenario { MainNcoShared, NcoUnaffectedWithNco, NcoUnaffectedNoNco, NaivePooling };

std::string_view to_string(Scenario s);
/// Throws ConfigError on an unknown name.
Scenario parse_scenario(std::string_view name);

struct ScenarioConfig {
    Scenario scenario = Scenario::MainNcoShared;
    int iterations = 1000;
    /// Empty means the scenario default (the full grid, or its extremes for
    /// NaivePooling).
    std::vector<double> bias_values;
    std::uint64_t master_seed = 20240601;
    SelectorConfig selector;
    SignificanceRule rule;
    int parallelism = 1;
    std::size_t oracle_n_mc = 10'000'000;
    DgpConfig dgp;

    /// Scenario settings applied to the selector (NCO use, bias source).
    SelectorConfig effective_selector() const;
    std::vector<double> effective_bias_values() const;
    void validate() const;
};

std::vector<double> default_bias_values(Scenario s);

/// Reads fields named as in ScenarioConfig; unknown keys are rejected.
ScenarioConfig scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScenarioConfig& c);

/// Root stream of one iteration. Scenarios that generate identical real-world
/// data share it so their results are paired.
IterationStreams iteration_streams(const ScenarioConfig& config, int iter);

struct IterationOutcome {
    std::optional<DesignOutcome> d1;
    std::optional<DesignOutcome> d2;
    /// One entry per effective bias value (Design 3 or naive pooling).
    std::vector<std::optional<DesignOutcome>> by_bias;
    std::vector<std::string> errors;
};

IterationOutcome run_iteration(const ScenarioConfig& config, int iter);

struct MetricsRow {
    std::string design;
    std::string scenario;
    std::optional<double> bias_b;
    std::optional<double> true_bias;
    double coverage = 0.0;
    double power = 0.0;
    std::optional<double> mean_person_years;
    std::optional<double> mean_inclusion_fraction;
    int iterations = 0;
};

struct CampaignResult {
    std::vector<MetricsRow> rows;
    int failures = 0;
    std::vector<std::string> failure_messages;
    nlohmann::json metadata;
    double wall_seconds = 0.0;
};

/// Iterations run on `parallelism` threads; aggregation is in iteration order.
CampaignResult run_campaign(const ScenarioConfig& config);

}  // namespace hybridsim
