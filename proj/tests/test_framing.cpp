// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "beamtrack/framing.hpp"

using namespace beamtrack;

TEST_CASE("overhead fraction: closed-form values")
{
    FrameConfig cfg;
    cfg.t_acq = 0.0;
    cfg.t_fb_i = 0.0;
    cfg.t_dl = 500.0;
    cfg.t_sp = 0.0;
    cfg.t_fb_sp = 0.0;
    CHECK(overhead_fraction(FrameKind::Initialization, cfg) == doctest::Approx(0.0));

    cfg = FrameConfig{181.0, 10.0, 500.0, 3.0, 3.0};
    CHECK(overhead_fraction(FrameKind::Initialization, cfg) == doctest::Approx(194.0 / 694.0).epsilon(1e-12));
    CHECK(overhead_fraction(FrameKind::Secondary, cfg) == doctest::Approx(6.0 / 506.0).epsilon(1e-12));
}

TEST_CASE("overhead fraction: zero-length frame is rejected")
{
    FrameConfig cfg;
    cfg.t_dl = 0.0;
    cfg.t_acq = cfg.t_fb_i = cfg.t_sp = cfg.t_fb_sp = 0.0;
    CHECK_THROWS_AS((void)overhead_fraction(FrameKind::Secondary, cfg), std::invalid_argument);
}

TEST_CASE("rate: perfect on-grid alignment matches the closed form")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    FrameConfig cfg{181.0, 10.0, 500.0, 3.0, 3.0};
    ChannelState state;
    state.theta_deg = 21.0;
    state.alpha = {0.5, 0.0};

    const double rho = overhead_fraction(FrameKind::Secondary, cfg);
    const double expected = (1.0 - rho) * std::log2(1.0 + 0.25 * 64.0);
    CHECK(instantaneous_rate(state, 21.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom) ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("rate: a beamspace null yields zero rate")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    FrameConfig cfg;
    ChannelState state;
    state.theta_deg = 0.0;
    state.alpha = {1.0, 0.0};
    // sin(theta_hat) = 2/64 places the true angle on the first Dirichlet null.
    const double theta_hat = std::asin(2.0 / 64.0) * 180.0 / 3.14159265358979323846;
    const double r = instantaneous_rate(state, theta_hat, FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom);
    CHECK(r == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("rate: paper operating point evaluates to ~5.929 bit/s/Hz")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    FrameConfig cfg{181.0, 10.0, 500.0, 3.0, 3.0};
    ChannelState state;
    state.theta_deg = 0.0;
    state.alpha = {std::sqrt(63.0 / 64.0), 0.0}; // |alpha|^2 N = 63
    const double r = instantaneous_rate(state, 0.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom);
    CHECK(r == doctest::Approx((500.0 / 506.0) * 6.0).epsilon(1e-9));
}

TEST_CASE("rate: the nearest codebook beam maximizes the rate over the grid")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(64);
    FrameConfig cfg;
    ChannelState state;
    state.alpha = {1.0, 0.0};
    for (double theta : {-41.3, -12.8, 0.4, 7.9, 33.1}) {
        state.theta_deg = theta;
        const double nearest = std::round(theta); // 1-degree grid
        double best_rate = -1.0;
        double best_angle = 0.0;
        for (int g = -90; g <= 90; ++g) {
            const double r =
                instantaneous_rate(state, double(g), FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom);
            if (r > best_rate) {
                best_rate = r;
                best_angle = double(g);
            }
        }
        CHECK(best_angle == doctest::Approx(nearest));
    }
}

TEST_CASE("rate: initialization overhead never beats secondary overhead")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(32);
    FrameConfig cfg{64.0, 10.0, 500.0, 1.0, 1.0};
    ChannelState state;
    state.theta_deg = 10.0;
    state.alpha = {0.7, 0.2};
    const double init = instantaneous_rate(state, 10.0, FrameKind::Initialization, cfg, 1.0, 1.0, 0.0, geom);
    const double secondary = instantaneous_rate(state, 10.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom);
    CHECK(init <= secondary);
}

TEST_CASE("rate: invariant to the Doppler shift")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(16);
    FrameConfig cfg;
    ChannelState state;
    state.theta_deg = -5.0;
    state.alpha = {0.9, 0.1};
    state.doppler_hz = 0.0;
    const double base = instantaneous_rate(state, -5.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.37, geom);
    for (double nu : {-5000.0, -12.5, 3.0, 999.75}) {
        state.doppler_hz = nu;
        CHECK(instantaneous_rate(state, -5.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.37, geom) ==
              doctest::Approx(base).epsilon(1e-12));
    }
}

TEST_CASE("rate: rejects invalid inputs")
{
    const ArrayGeometry geom = ArrayGeometry::uniform(4);
    FrameConfig cfg;
    ChannelState state;
    state.alpha = {1.0, 0.0};
    CHECK_THROWS_AS((void)instantaneous_rate(state, 120.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom),
                    std::invalid_argument);
    state.alpha = {0.0, 0.0};
    CHECK_THROWS_AS((void)instantaneous_rate(state, 0.0, FrameKind::Secondary, cfg, 1.0, 1.0, 0.0, geom),
                    std::invalid_argument);
}
