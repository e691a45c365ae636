// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/motion.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>

namespace beamtrack {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
constexpr double kJunctionTolM = 1e-6;

void validate_profile(const std::vector<SpeedPoint>& profile)
{
    if (profile.empty())
        throw std::invalid_argument("TrajectorySpec: empty speed profile");
    double prev = 0.0;
    for (std::size_t i = 0; i < profile.size(); ++i) {
        if (!(profile[i].speed_mps > 0.0))
            throw std::invalid_argument("TrajectorySpec: speeds must be > 0");
        if (profile[i].fraction < 0.0 || profile[i].fraction > 1.0)
            throw std::invalid_argument("TrajectorySpec: profile fractions must lie in [0, 1]");
        if (i > 0 && profile[i].fraction < prev)
            throw std::invalid_argument("TrajectorySpec: profile fractions must be nondecreasing");
        prev = profile[i].fraction;
    }
}

double profile_speed(const std::vector<SpeedPoint>& profile, double fraction)
{
    double speed = profile.front().speed_mps;
    for (const auto& p : profile) {
        if (p.fraction <= fraction)
            speed = p.speed_mps;
        else
            break;
    }
    return speed;
}

struct SegmentGeometry {
    double length = 0.0;
    const std::vector<SpeedPoint>* profile = nullptr;
    Eigen::Vector2d start;
    Eigen::Vector2d end;
    // Position at arc length s from the segment start.
    std::function<Eigen::Vector2d(double)> at;
};

SegmentGeometry describe(const TrajectorySegment& seg)
{
    SegmentGeometry g;
    if (const auto* arc = std::get_if<CircularArc>(&seg)) {
        const double sweep_rad = (arc->end_angle_deg - arc->start_angle_deg) * kDegToRad;
        g.length = std::abs(sweep_rad) * arc->radius_m;
        g.profile = &arc->speed_profile;
        const Eigen::Vector2d c = arc->center_m;
        const double r = arc->radius_m;
        const double phi0 = arc->start_angle_deg * kDegToRad;
        const double dir = sweep_rad >= 0.0 ? 1.0 : -1.0;
        g.at = [c, r, phi0, dir](double s) {
            const double phi = phi0 + dir * s / r;
            return Eigen::Vector2d(c.x() + r * std::cos(phi), c.y() + r * std::sin(phi));
        };
    } else {
        const auto& line = std::get<LineSegment>(seg);
        g.length = (line.end_m - line.start_m).norm();
        g.profile = &line.speed_profile;
        const Eigen::Vector2d a = line.start_m;
        const Eigen::Vector2d u = (line.end_m - line.start_m) / g.length;
        g.at = [a, u](double s) { return Eigen::Vector2d(a + s * u); };
    }
    g.start = g.at(0.0);
    g.end = g.at(g.length);
    return g;
}

} // namespace

void TrajectorySpec::validate() const
{
    if (segments.empty())
        throw std::invalid_argument("TrajectorySpec: no segments");
    if (!(frame_period_s > 0.0))
        throw std::invalid_argument("TrajectorySpec: frame_period_s must be > 0");
    for (const auto& seg : segments) {
        if (const auto* arc = std::get_if<CircularArc>(&seg)) {
            if (!(arc->radius_m > 0.0))
                throw std::invalid_argument("TrajectorySpec: arc radius must be > 0");
            if (arc->end_angle_deg == arc->start_angle_deg)
                throw std::invalid_argument("TrajectorySpec: zero-sweep arc");
            validate_profile(arc->speed_profile);
        } else {
            const auto& line = std::get<LineSegment>(seg);
            if ((line.end_m - line.start_m).norm() <= 0.0)
                throw std::invalid_argument("TrajectorySpec: zero-length line");
            validate_profile(line.speed_profile);
        }
    }
}

void LinkBudget::validate() const
{
    if (!(carrier_hz > 0.0))
        throw std::invalid_argument("LinkBudget: carrier_hz must be > 0");
    if (!(ref_distance_m > 0.0))
        throw std::invalid_argument("LinkBudget: ref_distance_m must be > 0");
    if (pathloss_exponent < 0.0)
        throw std::invalid_argument("LinkBudget: pathloss_exponent must be >= 0");
    if (!(ref_gain > 0.0))
        throw std::invalid_argument("LinkBudget: ref_gain must be > 0");
}

Trajectory generate_trajectory(const TrajectorySpec& spec)
{
    spec.validate();

    std::vector<SegmentGeometry> segs;
    segs.reserve(spec.segments.size());
    double total_length = 0.0;
    for (const auto& seg : spec.segments) {
        SegmentGeometry g = describe(seg);
        if (!segs.empty() && (g.start - segs.back().end).norm() > kJunctionTolM)
            throw std::invalid_argument("generate_trajectory: discontinuous segment junction");
        total_length += g.length;
        segs.push_back(std::move(g));
    }

    std::vector<Eigen::Vector2d> points;
    const double dt = spec.frame_period_s;
    double s_global = 0.0;
    std::size_t seg_idx = 0;
    double seg_offset = 0.0; // arc length of segs[seg_idx] start within the path
    while (true) {
        while (seg_idx + 1 < segs.size() && s_global >= seg_offset + segs[seg_idx].length) {
            seg_offset += segs[seg_idx].length;
            ++seg_idx;
        }
        const SegmentGeometry& g = segs[seg_idx];
        const double s_local = s_global - seg_offset;
        points.push_back(g.at(s_local));

        const double speed = profile_speed(*g.profile, s_local / g.length);
        const double step = speed * dt;
        if (s_global + step > total_length + 1e-9)
            break;
        s_global = std::min(s_global + step, total_length);
    }

    Trajectory traj;
    traj.positions_m.resize(2, static_cast<Eigen::Index>(points.size()));
    traj.times_s.resize(static_cast<Eigen::Index>(points.size()));
    for (std::size_t k = 0; k < points.size(); ++k) {
        traj.positions_m.col(static_cast<Eigen::Index>(k)) = points[k];
        traj.times_s[static_cast<Eigen::Index>(k)] = double(k) * dt;
    }
    return traj;
}

std::vector<ChannelState> to_channel_states(const Trajectory& traj, const LinkBudget& budget,
                                            double global_phase_rad)
{
    budget.validate();
    const int n = traj.frames();
    if (n == 0)
        throw std::invalid_argument("to_channel_states: empty trajectory");

    Eigen::VectorXd range(n);
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d delta = traj.positions_m.col(k) - budget.bs_position_m;
        range[k] = delta.norm();
        if (range[k] <= 0.0)
            throw std::invalid_argument("to_channel_states: UE coincides with the BS");
    }

    std::vector<ChannelState> states(n);
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d delta = traj.positions_m.col(k) - budget.bs_position_m;
        const double bearing_deg = std::atan2(delta.x(), delta.y()) / kDegToRad;
        if (bearing_deg < -90.0 || bearing_deg > 90.0)
            throw std::invalid_argument("to_channel_states: bearing leaves the array's front half-space");

        const double magnitude =
            budget.ref_gain * std::pow(budget.ref_distance_m / range[k], budget.pathloss_exponent / 2.0);

        // Forward difference of range; the last frame reuses the backward one.
        double radial_speed = 0.0;
        if (n > 1) {
            const int hi = std::min(k + 1, n - 1);
            radial_speed = (range[hi] - range[hi - 1]) / (traj.times_s[hi] - traj.times_s[hi - 1]);
        }

        states[k].theta_deg = bearing_deg;
        states[k].alpha = std::polar(magnitude, global_phase_rad);
        states[k].doppler_hz = -radial_speed * budget.carrier_hz / kSpeedOfLight;
        states[k].delay_s = range[k] / kSpeedOfLight;
    }
    return states;
}

TrajectorySpec rotate_spec(const TrajectorySpec& spec, const Eigen::Vector2d& pivot_m, double delta_deg)
{
    // Bearings are measured clockwise from +y, so shifting them by +delta is a
    // clockwise (negative polar) rotation of the scene.
    const double c = std::cos(-delta_deg * kDegToRad);
    const double s = std::sin(-delta_deg * kDegToRad);
    Eigen::Matrix2d rot;
    rot << c, -s, s, c;
    auto rotate_point = [&](const Eigen::Vector2d& p) { return Eigen::Vector2d(pivot_m + rot * (p - pivot_m)); };

    TrajectorySpec out = spec;
    for (auto& seg : out.segments) {
        if (auto* arc = std::get_if<CircularArc>(&seg)) {
            arc->center_m = rotate_point(arc->center_m);
            arc->start_angle_deg -= delta_deg;
            arc->end_angle_deg -= delta_deg;
        } else {
            auto& line = std::get<LineSegment>(seg);
            line.start_m = rotate_point(line.start_m);
            line.end_m = rotate_point(line.end_m);
        }
    }
    return out;
}

} // namespace beamtrack
