// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "beamtrack/channel.hpp"

namespace beamtrack {

struct PfConfig {
    int n_particles = 100;
    double process_std_deg = 1.5;
    double resample_threshold = 0.5; // ESS fraction in (0, 1]

    void validate() const;
};

/// Weighted angle hypotheses plus the smoothed complex-gain estimate the
/// likelihood is evaluated against.
struct ParticleSet {
    Eigen::VectorXd angles_deg;
    Eigen::VectorXd weights; // nonnegative, sums to 1
    std::complex<double> gain_estimate{0.0, 0.0};
    bool diverged = false;
};

struct PfStepResult {
    double theta_hat_deg = 0.0;
    bool resampled = false;
    bool diverged = false; // all likelihood weights underflowed this step
};

/// Seeds the cloud around the best beam of the initial alignment sweep and
/// initializes the gain estimate from that beam's measurement.
ParticleSet pf_init(const PfConfig& cfg, const PseudoSpectrum& spectrum, const Codebook& cb, Rng& rng);

/// One predict/weight/resample cycle against a single probe measurement.
/// Weights are set proportional to exp(-|z - alpha_hat a^H(theta_p) f|^2 / sigma^2);
/// if every weight underflows to zero the set falls back to uniform weights and
/// is flagged diverged. The gain estimate is refreshed by 0.9/0.1 exponential
/// smoothing of z / (a^H(theta_hat) f).
PfStepResult pf_step(ParticleSet& ps, std::complex<double> z,
                     const Eigen::Ref<const Eigen::VectorXcd>& probe_beam, const PfConfig& cfg,
                     double noise_std, const ArrayGeometry& geom, Rng& rng);

/// Systematic (stratified single-offset) resampling: one uniform draw in
/// [0, 1/N) and strides of 1/N over the weight CDF. Expected copy count of
/// particle p is N * w_p. Rejects weights that do not sum to 1 within 1e-9.
std::vector<int> resample_systematic(const Eigen::Ref<const Eigen::VectorXd>& weights, Rng& rng);

/// 1 / sum(w^2); equals N for uniform weights.
double effective_sample_size(const Eigen::Ref<const Eigen::VectorXd>& weights);

} // namespace beamtrack
