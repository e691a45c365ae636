// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/framing.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamtrack {

void FrameConfig::validate() const
{
    if (t_acq < 0.0 || t_fb_i < 0.0 || t_sp < 0.0 || t_fb_sp < 0.0)
        throw std::invalid_argument("FrameConfig: durations must be >= 0");
    if (!(t_dl > 0.0))
        throw std::invalid_argument("FrameConfig: t_dl must be > 0");
}

double overhead_fraction(FrameKind kind, const FrameConfig& cfg)
{
    cfg.validate();
    const double total = cfg.total(kind);
    if (!(total > 0.0))
        throw std::invalid_argument("overhead_fraction: zero total frame length");
    const double t_x =
        kind == FrameKind::Initialization ? cfg.t_acq + cfg.t_fb_i + cfg.t_sp : cfg.t_fb_sp + cfg.t_sp;
    return t_x / total;
}

double instantaneous_rate(const ChannelState& state, double theta_hat_deg, FrameKind kind,
                          const FrameConfig& cfg, double power, double noise_std, double sample_time_s,
                          const ArrayGeometry& geom)
{
    if (!(std::abs(state.alpha) > 0.0))
        throw std::invalid_argument("instantaneous_rate: |alpha| must be > 0");
    if (!(noise_std > 0.0))
        throw std::invalid_argument("instantaneous_rate: noise_std must be > 0");
    if (theta_hat_deg < -90.0 || theta_hat_deg > 90.0)
        throw std::invalid_argument("instantaneous_rate: theta_hat outside the codebook range");

    const Eigen::VectorXcd a_tx = steering_vector(geom, state.theta_deg);
    const Eigen::VectorXcd beam = steering_vector(geom, theta_hat_deg) / std::sqrt(double(geom.n_tx));
    const std::complex<double> doppler =
        std::polar(1.0, 2.0 * std::numbers::pi * state.doppler_hz * sample_time_s);
    const std::complex<double> channel_gain = state.alpha * a_tx.dot(beam) * doppler;

    const double snr = power * std::norm(channel_gain) / (noise_std * noise_std);
    return (1.0 - overhead_fraction(kind, cfg)) * std::log2(1.0 + snr);
}

} // namespace beamtrack
