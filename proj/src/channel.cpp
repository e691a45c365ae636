// SPDX-License-Identifier: Apache-2.0
#include "beamtrack/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace beamtrack {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;
} // namespace

ArrayGeometry ArrayGeometry::uniform(int n, double pitch_wavelengths)
{
    ArrayGeometry geom;
    geom.n_tx = n;
    geom.spacing_wavelengths = pitch_wavelengths * Eigen::VectorXd::LinSpaced(n, 0.0, double(n - 1));
    geom.validate();
    return geom;
}

void ArrayGeometry::validate() const
{
    if (n_tx < 1)
        throw std::invalid_argument("ArrayGeometry: n_tx must be >= 1");
    if (spacing_wavelengths.size() != n_tx)
        throw std::invalid_argument("ArrayGeometry: positions length must equal n_tx");
    if (spacing_wavelengths[0] != 0.0)
        throw std::invalid_argument("ArrayGeometry: first element position must be 0");
    for (int i = 1; i < n_tx; ++i)
        if (!(spacing_wavelengths[i] > spacing_wavelengths[i - 1]))
            throw std::invalid_argument("ArrayGeometry: positions must be strictly increasing");
}

double Codebook::step_deg() const
{
    if (size() < 2)
        throw std::logic_error("Codebook: step undefined for fewer than 2 beams");
    return angles_deg[1] - angles_deg[0];
}

int Codebook::nearest_index(double theta_deg) const
{
    int best = 0;
    double best_dist = std::abs(angles_deg[0] - theta_deg);
    for (int i = 1; i < size(); ++i) {
        const double d = std::abs(angles_deg[i] - theta_deg);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

Eigen::VectorXcd steering_vector(const ArrayGeometry& geom, double theta_deg)
{
    geom.validate();
    if (!std::isfinite(theta_deg))
        throw std::invalid_argument("steering_vector: non-finite angle");
    if (theta_deg < -90.0 || theta_deg > 90.0)
        throw std::invalid_argument("steering_vector: angle outside [-90, 90] degrees");

    // cos(theta_phys) with theta_phys = 90 deg - theta collapses to sin(theta).
    const double spatial = std::sin(theta_deg * kDegToRad);
    Eigen::VectorXcd a(geom.n_tx);
    for (int i = 0; i < geom.n_tx; ++i) {
        const double phase = 2.0 * kPi * geom.spacing_wavelengths[i] * spatial;
        a[i] = std::polar(1.0, phase);
    }
    return a;
}

Codebook build_codebook(const ArrayGeometry& geom, double start_deg, double step_deg, int count)
{
    geom.validate();
    if (count < 2)
        throw std::invalid_argument("build_codebook: count must be >= 2");
    if (!(step_deg > 0.0))
        throw std::invalid_argument("build_codebook: step must be > 0");
    const double end_deg = start_deg + step_deg * (count - 1);
    if (start_deg < -90.0 || end_deg > 90.0)
        throw std::invalid_argument("build_codebook: grid extends outside [-90, 90]");

    Codebook cb;
    cb.angles_deg = Eigen::VectorXd::LinSpaced(count, start_deg, end_deg);
    cb.vectors.resize(geom.n_tx, count);
    const double scale = 1.0 / std::sqrt(double(geom.n_tx));
    for (int i = 0; i < count; ++i)
        cb.vectors.col(i) = scale * steering_vector(geom, cb.angles_deg[i]);
    return cb;
}

std::complex<double> measure(const ChannelState& state, const ArrayGeometry& geom,
                             const Eigen::Ref<const Eigen::VectorXcd>& beam, double noise_std,
                             double sample_time_s, Rng& rng)
{
    if (beam.size() != geom.n_tx)
        throw std::invalid_argument("measure: beam length does not match array size");
    if (noise_std < 0.0)
        throw std::invalid_argument("measure: noise_std must be >= 0");

    // Single-antenna UE: combiner and receive steering reduce to 1; unit pilot.
    const Eigen::VectorXcd a_tx = steering_vector(geom, state.theta_deg);
    const std::complex<double> gain = a_tx.dot(beam); // a^H * f
    const std::complex<double> doppler = std::polar(1.0, 2.0 * kPi * state.doppler_hz * sample_time_s);
    std::complex<double> z = state.alpha * gain * doppler;
    if (noise_std > 0.0)
        z += complex_gaussian(rng, noise_std);
    return z;
}

PseudoSpectrum beam_sweep(const ChannelState& state, const ArrayGeometry& geom, const Codebook& cb,
                          double noise_std, double t0_s, double dt_s, Rng& rng)
{
    if (cb.size() < 1)
        throw std::invalid_argument("beam_sweep: empty codebook");
    PseudoSpectrum spectrum;
    spectrum.values.resize(cb.size());
    for (int i = 0; i < cb.size(); ++i)
        spectrum.values[i] = measure(state, geom, cb.vectors.col(i), noise_std, t0_s + i * dt_s, rng);
    spectrum.main_index = argmax_magnitude(spectrum.values);
    return spectrum;
}

} // namespace beamtrack
