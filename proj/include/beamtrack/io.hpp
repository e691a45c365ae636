// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "beamtrack/dataset.hpp"
#include "beamtrack/rnn.hpp"
#include "beamtrack/tracking.hpp"

namespace beamtrack {

/// Shortest decimal rendering that round-trips the exact double.
std::string format_double(double value);

/// "# seed=<seed> config_hash=<hex>" header line embedded in every artifact.
std::string artifact_header(std::uint64_t seed, std::uint64_t hash);

/// One row per (realization, frame): features then labels.
void write_dataset_csv(const std::string& path, const Dataset& data, const std::string& header);

void write_loss_csv(const std::string& path, const TrainTrace& trace, const std::string& header);

/// Rows: realization, frame, tracker, theta_true, theta_hat, rate, frame_kind,
/// reacq_flag. Results are keyed by tracker name in the given order.
struct NamedTracks {
    std::string tracker;
    std::vector<TrackResult> results; // one per realization
};
void write_track_csv(const std::string& path, const std::vector<NamedTracks>& tracks,
                     const std::string& header);

/// One summary row per (tracker, window length, probes).
struct ReportRow {
    std::string tracker;
    int window_len = 0;
    int probes = 0;
    double mse_deg2 = 0.0;
    double mean_rate = 0.0;
};
void write_report_csv(const std::string& path, const std::vector<ReportRow>& rows,
                      const std::string& header);

} // namespace beamtrack
