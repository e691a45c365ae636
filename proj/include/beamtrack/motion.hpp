// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <variant>
#include <vector>

#include "beamtrack/channel.hpp"

namespace beamtrack {

/// Speed of light used for Doppler and delay conversions, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

/// Piecewise-constant speed profile point: speed_mps applies from this
/// arc-length fraction onward.
struct SpeedPoint {
    double fraction = 0.0;
    double speed_mps = 0.0;
};

struct CircularArc {
    Eigen::Vector2d center_m{0.0, 0.0};
    double radius_m = 0.0;
    double start_angle_deg = 0.0; // polar angle about the center, CCW positive
    double end_angle_deg = 0.0;   // may exceed +-180 to describe multi-loop sweeps
    std::vector<SpeedPoint> speed_profile;
};

struct LineSegment {
    Eigen::Vector2d start_m{0.0, 0.0};
    Eigen::Vector2d end_m{0.0, 0.0};
    std::vector<SpeedPoint> speed_profile;
};

using TrajectorySegment = std::variant<CircularArc, LineSegment>;

struct TrajectorySpec {
    std::vector<TrajectorySegment> segments;
    double frame_period_s = 0.1;

    void validate() const; // throws std::invalid_argument
};

/// Frame-sampled path: column k of positions_m is the UE position at times_s[k].
struct Trajectory {
    Eigen::Matrix2Xd positions_m;
    Eigen::VectorXd times_s;

    int frames() const { return static_cast<int>(positions_m.cols()); }
};

/// Parametric replacement for a measured link: |alpha| follows a power-law
/// range model referenced at ref_distance_m.
struct LinkBudget {
    Eigen::Vector2d bs_position_m{0.0, 0.0};
    double carrier_hz = 28e9;
    double ref_gain = 1.0;
    double ref_distance_m = 1.0;
    double pathloss_exponent = 2.0;

    void validate() const;
};

/// Samples the path at frame_period_s, advancing by speed * dt per frame with
/// the piecewise-constant speed profile, carrying leftover distance across
/// segment junctions. Junction gaps above 1e-6 m are rejected.
Trajectory generate_trajectory(const TrajectorySpec& spec);

/// Per-frame LoS parameters: broadside-relative bearing from the BS, power-law
/// |alpha| with a caller-supplied global phase, Doppler from the finite
/// difference of range, and the geometric delay.
std::vector<ChannelState> to_channel_states(const Trajectory& traj, const LinkBudget& budget,
                                            double global_phase_rad = 0.0);

/// Rigid rotation of every segment about a pivot, oriented so that bearings
/// seen from the pivot shift by +delta_deg. Used for the small
/// per-realization trajectory jitter.
TrajectorySpec rotate_spec(const TrajectorySpec& spec, const Eigen::Vector2d& pivot_m, double delta_deg);

} // namespace beamtrack
