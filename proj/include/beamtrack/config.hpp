// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "beamtrack/particle_filter.hpp"
#include "beamtrack/rnn.hpp"
#include "beamtrack/tracking.hpp"

namespace beamtrack {

/// Top-level experiment description loaded from a JSON config file.
struct ExperimentConfig {
    ScenarioConfig scenario;
    PfConfig pf;
    TrainConfig train;
    std::string output_dir = "out";
    std::vector<std::pair<int, int>> sweep; // (window half-width L, probes p)

    void validate() const;
};

/// Thrown on malformed JSON or missing keys; validation errors use
/// std::invalid_argument.
struct ConfigParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

/// Canonical (sorted-key) JSON rendering; parse(serialize(cfg)) == cfg.
std::string serialize_experiment_config(const ExperimentConfig& cfg);

/// FNV-1a over the canonical serialization.
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Scenario derived for one sweep cell: window half-width and probe count
/// replaced, SP durations re-derived from the probe count.
ScenarioConfig sweep_cell_scenario(const ScenarioConfig& base, int half_width, int probes);

} // namespace beamtrack
