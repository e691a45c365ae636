// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "beamtrack/rng.hpp"

namespace beamtrack {

/// Uniform-or-arbitrary linear array described by per-element positions in
/// wavelengths. First element sits at the phase reference (position 0).
struct ArrayGeometry {
    int n_tx = 0;
    Eigen::VectorXd spacing_wavelengths; // d_i / lambda, strictly increasing, [0] == 0

    /// n-element array with constant element pitch (default half wavelength).
    static ArrayGeometry uniform(int n, double pitch_wavelengths = 0.5);

    void validate() const; // throws std::invalid_argument on a malformed array
};

/// Ground-truth LoS path parameters for one frame. Angles are degrees from
/// broadside, in [-90, 90]. The delay is carried for completeness; with a unit
/// pilot it only contributes a constant phase absorbed into alpha.
struct ChannelState {
    double theta_deg = 0.0;
    std::complex<double> alpha{1.0, 0.0};
    double doppler_hz = 0.0;
    double delay_s = 0.0;
};

/// Grid of unit-norm beamforming vectors on a uniform angle grid.
struct Codebook {
    Eigen::VectorXd angles_deg; // G entries, strictly increasing, uniform step
    Eigen::MatrixXcd vectors;   // n_tx x G, column i = steering(angles[i]) / sqrt(n_tx)

    int size() const { return static_cast<int>(angles_deg.size()); }
    double step_deg() const;
    /// Grid index whose angle is closest to theta (ties toward the lower index).
    int nearest_index(double theta_deg) const;
};

/// One measurement per codebook beam; main_index is the argmax of |values|
/// at creation time.
struct PseudoSpectrum {
    Eigen::VectorXcd values;
    int main_index = 0;
};

/// Transmit steering vector for an angle given in degrees from broadside.
/// Element i is exp(j*2*pi*(d_i/lambda)*cos(theta_phys)) with
/// theta_phys = 90 deg - theta_deg, i.e. the phase term reduces to
/// sin(theta_deg). Every entry has unit magnitude.
Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double theta_deg);

/// Builds `count` beams at start + k*step, each normalized by 1/sqrt(n_tx).
/// The grid must stay inside [-90, 90].
Codebook build_codebook(const ArrayGeometry& geom, double start_deg, double step_deg, int count);

/// Noisy single-beam probe: alpha * a^H(theta) f * exp(j*2*pi*nu*t) + eta with a
/// unit pilot, single-antenna UE, and eta ~ CN(0, noise_std^2).
std::complex<double> measure(const ChannelState& state, const ArrayGeometry& geom,
                             const Eigen::Ref<const Eigen::VectorXcd>& beam, double noise_std,
                             double sample_time_s, Rng& rng);

/// Probes every codebook beam, sampling beam i at t0 + i*dt.
PseudoSpectrum beam_sweep(const ChannelState& state, const ArrayGeometry& geom, const Codebook& cb,
                          double noise_std, double t0_s, double dt_s, Rng& rng);

inline int argmax_magnitude(const Eigen::VectorXcd& v)
{
    int idx = 0;
    v.cwiseAbs().maxCoeff(&idx);
    return idx;
}

} // namespace beamtrack
