// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/particle_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace beamtrack {

void PfConfig::validate() const
{
    if (n_particles < 1)
        throw std::invalid_argument("PfConfig: n_particles must be >= 1");
    if (!(process_std_deg > 0.0))
        throw std::invalid_argument("PfConfig: process_std_deg must be > 0");
    if (!(resample_threshold > 0.0) || resample_threshold > 1.0)
        throw std::invalid_argument("PfConfig: resample_threshold must lie in (0, 1]");
}

double effective_sample_size(const Eigen::Ref<const Eigen::VectorXd>& weights)
{
    return 1.0 / weights.squaredNorm();
}

ParticleSet pf_init(const PfConfig& cfg, const PseudoSpectrum& spectrum, const Codebook& cb, Rng& rng)
{
    cfg.validate();
    const int m = spectrum.main_index;
    const double center = cb.angles_deg[m];

    ParticleSet ps;
    ps.angles_deg.resize(cfg.n_particles);
    for (int p = 0; p < cfg.n_particles; ++p)
        ps.angles_deg[p] = std::clamp(gaussian(rng, center, cfg.process_std_deg), -90.0, 90.0);
    ps.weights = Eigen::VectorXd::Constant(cfg.n_particles, 1.0 / cfg.n_particles);

    // a(theta_m)^H f_m with f_m = a / sqrt(N) reduces to sqrt(N).
    const int n_tx = static_cast<int>(cb.vectors.rows());
    const Eigen::VectorXcd a_m = std::sqrt(double(n_tx)) * cb.vectors.col(m);
    ps.gain_estimate = spectrum.values[m] / a_m.dot(cb.vectors.col(m));
    return ps;
}

std::vector<int> resample_systematic(const Eigen::Ref<const Eigen::VectorXd>& weights, Rng& rng)
{
    const int n = static_cast<int>(weights.size());
    if (n < 1)
        throw std::invalid_argument("resample_systematic: empty weights");
    if (std::abs(weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("resample_systematic: weights are not normalized");

    const double u0 = uniform(rng, 0.0, 1.0 / n);
    std::vector<int> indices(n);
    double cumulative = weights[0];
    int j = 0;
    for (int i = 0; i < n; ++i) {
        const double u = u0 + double(i) / n;
        while (cumulative < u && j + 1 < n)
            cumulative += weights[++j];
        indices[i] = j;
    }
    return indices;
}

PfStepResult pf_step(ParticleSet& ps, std::complex<double> z,
                     const Eigen::Ref<const Eigen::VectorXcd>& probe_beam, const PfConfig& cfg,
                     double noise_std, const ArrayGeometry& geom, Rng& rng)
{
    cfg.validate();
    const int n = static_cast<int>(ps.angles_deg.size());
    if (n != cfg.n_particles || ps.weights.size() != n)
        throw std::invalid_argument("pf_step: particle set does not match config");

    PfStepResult result;

    // Predict: random-walk transition, clamped to the codebook's angular domain.
    for (int p = 0; p < n; ++p)
        ps.angles_deg[p] = std::clamp(ps.angles_deg[p] + gaussian(rng, 0.0, cfg.process_std_deg), -90.0, 90.0);

    // Weight against the measurement model.
    const double var = noise_std * noise_std;
    Eigen::VectorXd w(n);
    for (int p = 0; p < n; ++p) {
        const Eigen::VectorXcd a_p = steering_vector(geom, ps.angles_deg[p]);
        const std::complex<double> predicted = ps.gain_estimate * a_p.dot(probe_beam);
        const double residual2 = std::norm(z - predicted);
        w[p] = var > 0.0 ? std::exp(-residual2 / var) : 0.0;
    }
    const double w_sum = w.sum();
    if (!(w_sum > 0.0) || !std::isfinite(w_sum)) {
        ps.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
        ps.diverged = true;
        result.diverged = true;
    } else {
        ps.weights = w / w_sum;
    }

    // Resample when the effective sample size collapses.
    if (effective_sample_size(ps.weights) < cfg.resample_threshold * n) {
        const std::vector<int> idx = resample_systematic(ps.weights, rng);
        Eigen::VectorXd resampled(n);
        for (int i = 0; i < n; ++i)
            resampled[i] = ps.angles_deg[idx[i]];
        ps.angles_deg = std::move(resampled);
        ps.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
        result.resampled = true;
    }

    result.theta_hat_deg = ps.weights.dot(ps.angles_deg);

    // Track the complex gain on the main-beam direction with mild smoothing.
    const Eigen::VectorXcd a_hat = steering_vector(geom, result.theta_hat_deg);
    const std::complex<double> denom = a_hat.dot(probe_beam);
    if (std::abs(denom) > 1e-12)
        ps.gain_estimate = 0.9 * ps.gain_estimate + 0.1 * (z / denom);

    return result;
}

} // namespace beamtrack
