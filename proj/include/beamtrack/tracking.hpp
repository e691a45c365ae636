// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "beamtrack/channel.hpp"
#include "beamtrack/dataset.hpp"
#include "beamtrack/framing.hpp"
#include "beamtrack/motion.hpp"
#include "beamtrack/particle_filter.hpp"
#include "beamtrack/rnn.hpp"

namespace beamtrack {

struct CodebookSpec {
    double start_deg = -90.0;
    double step_deg = 1.0;
    int count = 181;
};

/// Everything needed to reproduce one experiment: geometry, codebook grid,
/// trajectory, link budget, frame layout, noise/power, probing and window
/// parameters, realization count, and the master seed. The evaluation window
/// (held-out section) is expressed in absolute frame indices.
struct ScenarioConfig {
    ArrayGeometry geometry = ArrayGeometry::uniform(64);
    CodebookSpec codebook;
    TrajectorySpec trajectory;
    LinkBudget link_budget;
    FrameConfig frame;
    double noise_std = 1.0;
    double power = 1.0;
    int probes_per_frame = 1;
    int window_half_width = 8;
    int realizations = 26;
    std::uint64_t seed = 1234;

    int track_start_frame = 0;        // trackers run from here (initial BA frame)
    int eval_start_frame = 0;         // metrics window start
    int eval_frames = 0;              // 0 = through the last frame
    std::vector<int> segment_bounds;  // eval-relative cut points, e.g. {0, 42, 59, 98}
    double trajectory_jitter_deg = 0.5;

    void validate() const;
    Codebook make_codebook() const;
};

/// Per-frame log of one tracker over one realization. start_frame is the
/// absolute index of entry 0.
struct TrackResult {
    int start_frame = 0;
    Eigen::VectorXd theta_true_deg;
    Eigen::VectorXd theta_hat_deg;
    Eigen::VectorXd rates;
    std::vector<FrameKind> frame_kinds;
    std::vector<int> reacquisitions; // absolute frame indices
    bool pf_diverged = false;

    int frames() const { return static_cast<int>(theta_true_deg.size()); }
};

/// Independent RNG stream for (realization, purpose) pairs under the master seed.
enum class StreamPurpose : std::uint64_t {
    Realization = 0,    // jitter + global phase
    TrainingProbes = 1, // teacher-forced dataset measurements
    PfProbes = 2,
    PfAlgorithm = 3,
    RnnProbes = 4,
};
Rng scenario_rng(const ScenarioConfig& cfg, int realization, StreamPurpose purpose);

/// Ground-truth channel sequence of one realization: jittered trajectory and
/// redrawn global phase, both derived from the master seed.
std::vector<ChannelState> realize_states(const ScenarioConfig& cfg, int realization);

/// Teacher-forced probe record over frames [0, eval_start_frame): the initial
/// sweep plus per-frame probes centered on the ground-truth main beam.
RunRecord simulate_training_run(const ScenarioConfig& cfg, const Codebook& cb, int realization);

/// Genie tracker: nearest codebook angle to the true AoD, always charged the
/// initialization overhead because the exact AoD requires a full alignment.
TrackResult track_oracle(const std::vector<ChannelState>& states, const Codebook& cb,
                         const ScenarioConfig& cfg, int start_frame = 0);

/// Particle-filter tracker: initial sweep, then one main-beam probe and one
/// predict/weight/resample cycle per frame.
TrackResult track_pf(const std::vector<ChannelState>& states, const Codebook& cb, const PfConfig& pf_cfg,
                     const ScenarioConfig& cfg, Rng& probe_rng, Rng& algo_rng, int start_frame = 0);

/// RNN tracker: initial sweep, then per frame p probes around the main beam,
/// a window-sequence prediction, and a beam correction by the predicted
/// offset. A collapse of the smoothed main-beam power below 25% of its recent
/// running median forces a fresh full sweep charged as an initialization frame.
TrackResult track_rnn(const std::vector<ChannelState>& states, const Codebook& cb, const RnnNetwork& net,
                      const ScenarioConfig& cfg, Rng& probe_rng, int start_frame = 0,
                      int context_len = 8);

/// Aggregate metrics over the evaluation window across realizations.
struct TrackerSummary {
    double mse_deg2 = 0.0;
    double mean_rate = 0.0;
    std::vector<double> segment_mse;     // per segment_bounds interval
    Eigen::VectorXd frame_mean_theta;    // per eval frame, averaged over realizations
    Eigen::VectorXd frame_binned_theta;  // frame_mean_theta rounded to the grid
    Eigen::VectorXd frame_mean_rate;
    Eigen::VectorXd frame_mean_true;
    int eval_frames = 0;
};

TrackerSummary evaluate(const std::vector<TrackResult>& results, const ScenarioConfig& cfg,
                        const Codebook& cb);

} // namespace beamtrack
