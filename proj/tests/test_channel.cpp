// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>

#include "beamtrack/channel.hpp"

using namespace beamtrack;

TEST_CASE("steering vector: broadside gives zero phase on every element")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(4);
    const Eigen::VectorXcd a = steering_vector(geom, 0.0);
    REQUIRE(a.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(a[i].real() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(a[i].imag() == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("steering vector: endfire two-element array is [1, -1]")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(2);
    const Eigen::VectorXcd a = steering_vector(geom, 90.0);
    CHECK(std::abs(a[0] - std::complex<double>(1.0, 0.0)) < 1e-12);
    CHECK(std::abs(a[1] - std::complex<double>(-1.0, 0.0)) < 1e-12);
}

TEST_CASE("steering vector: squared norm equals the element count by direct summation")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Eigen::VectorXcd a = steering_vector(geom, 27.3);
    double direct = 0.0;
    for (int i = 0; i < 64; ++i)
        direct += std::norm(a[i]);
    CHECK(direct == doctest::Approx(64.0).epsilon(1e-9));
    CHECK(a.squaredNorm() == doctest::Approx(64.0).epsilon(1e-9));
}

TEST_CASE("steering vector: unit-magnitude entries and conjugate mirror symmetry")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(16);
    for (double theta : {-88.5, -45.0, -7.25, 3.0, 33.33, 89.9}) {
        const Eigen::VectorXcd a = steering_vector(geom, theta);
        const Eigen::VectorXcd mirrored = steering_vector(geom, -theta);
        for (int i = 0; i < 16; ++i) {
            CHECK(std::abs(a[i]) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(mirrored[i] - std::conj(a[i])) < 1e-12);
        }
    }
}

TEST_CASE("steering vector: rejects non-finite and out-of-range angles")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(4);
    CHECK_THROWS_AS((void)steering_vector(geom, std::nan("")), std::invalid_argument);
    CHECK_THROWS_AS((void)steering_vector(geom, 90.5), std::invalid_argument);
}

TEST_CASE("geometry validation")
{
    ArrayGeometry geom;
    geom.n_tx = 2;
    geom.spacing_wavelengths = Eigen::Vector2d(0.5, 1.0); // first element must sit at 0
    CHECK_THROWS_AS(geom.validate(), std::invalid_argument);
    geom.spacing_wavelengths = Eigen::Vector2d(0.0, 0.0); // not increasing
    CHECK_THROWS_AS(geom.validate(), std::invalid_argument);
}

TEST_CASE("codebook: default 181-beam grid and beamforming gain")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Codebook cb = build_codebook(geom, -90.0, 1.0, 181);
    REQUIRE(cb.size() == 181);
    CHECK(cb.angles_deg[0] == doctest::Approx(-90.0));
    CHECK(cb.angles_deg[180] == doctest::Approx(90.0));
    CHECK(cb.step_deg() == doctest::Approx(1.0));

    // |a^H(theta_i) f_i|^2 == N for every beam, by brute-force inner product.
    for (int i = 0; i < cb.size(); ++i) {
        const Eigen::VectorXcd a = steering_vector(geom, cb.angles_deg[i]);
        std::complex<double> inner(0.0, 0.0);
        for (int e = 0; e < geom.n_tx; ++e)
            inner += std::conj(a[e]) * cb.vectors(e, i);
        CHECK(std::norm(inner) == doctest::Approx(64.0).epsilon(1e-9));
        CHECK(cb.vectors.col(i).norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("codebook: two-beam grid and range checks")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(8);
    const Codebook cb = build_codebook(geom, 0.0, 90.0, 2);
    CHECK(cb.angles_deg[0] == doctest::Approx(0.0));
    CHECK(cb.angles_deg[1] == doctest::Approx(90.0));

    CHECK_THROWS_AS((void)build_codebook(geom, 0.0, 90.0, 3), std::invalid_argument);
    CHECK_THROWS_AS((void)build_codebook(geom, -91.0, 1.0, 2), std::invalid_argument);
    CHECK_THROWS_AS((void)build_codebook(geom, 0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)build_codebook(geom, 0.0, -1.0, 2), std::invalid_argument);
}

TEST_CASE("measure: matched beam without noise returns alpha * sqrt(N)")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Codebook cb = build_codebook(geom, -90.0, 1.0, 181);
    ChannelState state;
    state.theta_deg = 17.0;
    state.alpha = {0.3, -0.4};
    Rng rng(1);
    const int idx = cb.nearest_index(17.0);
    const std::complex<double> z = measure(state, geom, cb.vectors.col(idx), 0.0, 0.0, rng);
    const std::complex<double> expected = state.alpha * std::sqrt(64.0);
    CHECK(std::abs(z - expected) < 1e-9);
}

TEST_CASE("measure: far-mismatched beam is deterministic and heavily attenuated")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Codebook cb = build_codebook(geom, -90.0, 1.0, 181);
    ChannelState state;
    state.theta_deg = 0.0;
    state.alpha = {1.0, 0.0};
    Rng rng(1);
    const int idx = cb.nearest_index(50.0);
    const std::complex<double> z = measure(state, geom, cb.vectors.col(idx), 0.0, 0.0, rng);

    // Direct evaluation of the array response at the mismatch.
    const Eigen::VectorXcd a = steering_vector(geom, 0.0);
    const std::complex<double> expected = a.dot(cb.vectors.col(idx));
    CHECK(std::abs(z - expected) < 1e-12);
    CHECK(std::abs(z) < 0.05 * std::sqrt(64.0));
}

TEST_CASE("measure: pure-noise magnitude-squared statistics match CN(0,1)")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(4);
    ChannelState state;
    state.theta_deg = 0.0;
    state.alpha = {0.0, 0.0};
    Rng rng(12345);
    const Eigen::VectorXcd beam = steering_vector(geom, 0.0) / 2.0;

    const int draws = 100000;
    double mean = 0.0, mean_sq = 0.0;
    for (int i = 0; i < draws; ++i) {
        const double p = std::norm(measure(state, geom, beam, 1.0, 0.0, rng));
        mean += p;
        mean_sq += p * p;
    }
    mean /= draws;
    mean_sq /= draws;
    const double variance = mean_sq - mean * mean;
    CHECK(std::abs(mean - 1.0) < 0.015);     // E|z|^2 = sigma^2 = 1
    CHECK(std::abs(variance - 1.0) < 0.03);  // Var|z|^2 = sigma^4 = 1 (exponential)
}

TEST_CASE("measure: Doppler phase rotates the noiseless measurement")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(8);
    ChannelState state;
    state.theta_deg = 0.0;
    state.alpha = {1.0, 0.0};
    state.doppler_hz = 100.0;
    Rng rng(1);
    const Eigen::VectorXcd beam = steering_vector(geom, 0.0) / std::sqrt(8.0);
    const std::complex<double> z0 = measure(state, geom, beam, 0.0, 0.0, rng);
    const std::complex<double> z1 = measure(state, geom, beam, 0.0, 0.0025, rng); // quarter period
    CHECK(std::abs(z0) == doctest::Approx(std::abs(z1)).epsilon(1e-12));
    CHECK(std::abs(z1 - z0 * std::polar(1.0, 2.0 * 3.14159265358979323846 * 100.0 * 0.0025)) < 1e-9);
}

TEST_CASE("measure: rejects mismatched beam length")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(8);
    ChannelState state;
    Rng rng(1);
    const Eigen::VectorXcd beam = Eigen::VectorXcd::Ones(4);
    CHECK_THROWS_AS((void)measure(state, geom, beam, 0.0, 0.0, rng), std::invalid_argument);
}

TEST_CASE("beam sweep: noiseless on-grid angle wins its own bin")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Codebook cb = build_codebook(geom, -90.0, 1.0, 181);
    ChannelState state;
    state.theta_deg = -37.0;
    state.alpha = {1.0, 0.0};
    Rng rng(7);
    const PseudoSpectrum spectrum = beam_sweep(state, geom, cb, 0.0, 0.0, 1e-6, rng);
    CHECK(spectrum.main_index == cb.nearest_index(-37.0));
}

TEST_CASE("beam sweep: midway angle resolves to one of the two neighbors")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Codebook cb = build_codebook(geom, -90.0, 1.0, 181);
    ChannelState state;
    state.theta_deg = 12.5;
    state.alpha = {1.0, 0.0};
    Rng rng(7);
    const PseudoSpectrum spectrum = beam_sweep(state, geom, cb, 0.0, 0.0, 1e-6, rng);
    const int left = cb.nearest_index(12.0);
    const int right = cb.nearest_index(13.0);
    CHECK((spectrum.main_index == left || spectrum.main_index == right));

    // Both neighbor magnitudes dominate every other bin.
    const Eigen::VectorXd mags = spectrum.values.cwiseAbs();
    for (int i = 0; i < cb.size(); ++i)
        if (i != left && i != right)
            CHECK(mags[i] < std::max(mags[left], mags[right]));
}

TEST_CASE("beam sweep: bit-reproducible under a fixed seed")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(32);
    const Codebook cb = build_codebook(geom, -60.0, 2.0, 61);
    ChannelState state;
    state.theta_deg = 5.0;
    state.alpha = {0.5, 0.5};
    Rng rng_a(99), rng_b(99);
    const PseudoSpectrum sa = beam_sweep(state, geom, cb, 1.0, 0.0, 1e-6, rng_a);
    const PseudoSpectrum sb = beam_sweep(state, geom, cb, 1.0, 0.0, 1e-6, rng_b);
    REQUIRE(sa.values.size() == sb.values.size());
    CHECK(sa.main_index == sb.main_index);
    for (int i = 0; i < sa.values.size(); ++i)
        CHECK(sa.values[i] == sb.values[i]);
}

TEST_CASE("beam sweep: Monte-Carlo hit rate at moderate SNR")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    const Codebook cb = build_codebook(geom, -90.0, 1.0, 181);
    ChannelState state;
    state.theta_deg = -20.0; // on-grid; |alpha| sqrt(N) = 8
    state.alpha = {1.0, 0.0};
    Rng rng(2024);
    const int truth = cb.nearest_index(-20.0);

    int hits = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const PseudoSpectrum spectrum = beam_sweep(state, geom, cb, 1.0, 0.0, 1e-6, rng);
        if (std::abs(spectrum.main_index - truth) <= 1)
            ++hits;
    }
    CHECK(hits > 950);
}
