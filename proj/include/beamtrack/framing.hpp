// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "beamtrack/channel.hpp"

namespace beamtrack {

enum class FrameKind { Initialization, Secondary };

/// Frame phase durations in abstract slots. An initialization frame spends
/// t_acq + t_fb_i + t_dl + t_sp, a secondary frame t_fb_sp + t_dl + t_sp.
struct FrameConfig {
    double t_acq = 181.0;
    double t_fb_i = 10.0;
    double t_dl = 500.0;
    double t_sp = 1.0;
    double t_fb_sp = 1.0;

    double total(FrameKind kind) const
    {
        return kind == FrameKind::Initialization ? t_acq + t_fb_i + t_dl + t_sp : t_fb_sp + t_dl + t_sp;
    }

    void validate() const;
};

/// Non-data fraction T_X / T_FR of the given frame kind.
double overhead_fraction(FrameKind kind, const FrameConfig& cfg);

/// Overhead-discounted spectral efficiency
/// (1 - T_X/T_FR) * log2(1 + P |alpha a^H(theta) f(theta_hat)|^2 / sigma^2)
/// with f(theta_hat) the unit-norm codebook-style beam at theta_hat. The
/// Doppler term is a unit-magnitude phase and cannot change the value.
double instantaneous_rate(const ChannelState& state, double theta_hat_deg, FrameKind kind,
                          const FrameConfig& cfg, double power, double noise_std, double sample_time_s,
                          const ArrayGeometry& geom);

} // namespace beamtrack
